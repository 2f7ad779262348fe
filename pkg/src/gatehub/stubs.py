"""Tiny stand-in executables for the real analysis programs.

Each stub accepts the same CLI (`--atoms N --minutes M [--fail] [--out FILE]`),
optionally sleeps `minutes * GATEHUB_MINUTE_MS` milliseconds so timing tests
can compress simulated minutes into real milliseconds, honors the checkpoint
contract via CKPT_IN/CKPT_OUT, and writes an output file sized like a
desk-scale version of the real program's product. Real binaries are drop-in
replacements: point the workflow binding at them instead.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

# Output bytes per stub, desk scale (real classes shrunk a thousandfold).
STUB_SIZES = {
    "lammps": 2_000_000,   # trajectory text
    "pizza": 2_000_000,    # converted trajectory text
    "debyer": 50_000,      # diffraction curve text
    "atomeye": 300,        # rendered image
    "r": 200,              # plot image
    "ffmpeg": 5_000,       # encoded video
}

STUB_NAMES = tuple(f"mock-{name}" for name in STUB_SIZES)


def _run(kind: str, argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog=f"mock-{kind}")
    parser.add_argument("--atoms", type=int, default=840)
    parser.add_argument("--minutes", type=float, default=1.0)
    parser.add_argument("--fail", action="store_true")
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    ckpt_in = os.environ.get("CKPT_IN", "")
    ckpt_out = os.environ.get("CKPT_OUT", "")
    progress = 0
    if ckpt_in:
        if not os.path.exists(ckpt_in):
            print(f"checkpoint missing: {ckpt_in}", file=sys.stderr)
            return 3
        with open(ckpt_in) as f:
            progress = int(f.read().strip() or "0")

    minute_ms = float(os.environ.get("GATEHUB_MINUTE_MS", "0"))
    if minute_ms > 0:
        time.sleep(args.minutes * minute_ms / 1000.0)

    if args.fail:
        print(f"mock-{kind}: injected failure", file=sys.stderr)
        return 1

    progress += 1
    if ckpt_out:
        with open(ckpt_out, "w") as f:
            f.write(str(progress))

    if args.out:
        size = STUB_SIZES[kind]
        line = f"{kind} atoms={args.atoms} step=%08d\n"
        with open(args.out, "w") as f:
            written = 0
            step = 0
            while written < size:
                chunk = line % step
                f.write(chunk)
                written += len(chunk)
                step += 1
        # Trim to the exact size so classification sees a stable byte count.
        with open(args.out, "r+") as f:
            f.truncate(size)

    print(f"mock-{kind} done: atoms={args.atoms} minutes={args.minutes:g} segments_done={progress}")
    return 0


def main_lammps() -> int:
    return _run("lammps")


def main_pizza() -> int:
    return _run("pizza")


def main_atomeye() -> int:
    return _run("atomeye")


def main_ffmpeg() -> int:
    return _run("ffmpeg")


def main_debyer() -> int:
    return _run("debyer")


def main_r() -> int:
    return _run("r")


def main() -> int:
    """Module entry: `python -m gatehub.stubs mock-lammps --atoms 840 ...`."""
    if len(sys.argv) < 2 or sys.argv[1] not in STUB_NAMES:
        print(f"usage: python -m gatehub.stubs {{{'|'.join(STUB_NAMES)}}} [args]", file=sys.stderr)
        return 2
    kind = sys.argv[1].removeprefix("mock-")
    return _run(kind, sys.argv[2:])


if __name__ == "__main__":
    sys.exit(main())
