"""Accounts, opaque bearer tokens, and the role permission matrix."""

from __future__ import annotations

import enum
import hashlib
import secrets
from dataclasses import dataclass

from .errors import AuthenticationFailed, PermissionDenied
from .store import Store


class Role(str, enum.Enum):
    ADMIN = "admin"
    POWER_USER = "power_user"
    END_USER = "end_user"


@dataclass(frozen=True)
class User:
    username: str
    role: Role


# Action -> roles allowed. Reads are open to everyone signed in; publishing
# and user management are restricted.
PERMISSIONS: dict[str, frozenset[Role]] = {
    "users.manage": frozenset({Role.ADMIN}),
    "templates.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "templates.create": frozenset({Role.ADMIN, Role.POWER_USER}),
    "templates.publish": frozenset({Role.ADMIN, Role.POWER_USER}),
    "labs.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "runs.create": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "runs.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "runs.control": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "jobs.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "sites.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
    "artifacts.read": frozenset({Role.ADMIN, Role.POWER_USER, Role.END_USER}),
}


def check(user: User, action: str) -> None:
    allowed = PERMISSIONS.get(action)
    if allowed is None or user.role not in allowed:
        raise PermissionDenied(f"{user.username} ({user.role.value}) may not {action}")


def _hash(secret: str) -> str:
    return hashlib.sha256(secret.encode()).hexdigest()


class Accounts:
    """User records and login tokens, persisted in the store."""

    def __init__(self, store: Store, bootstrap_admin_password: str = "admin"):
        self.store = store
        users = store.read_doc("users.json")
        if not users:
            users = {
                "admin": {"role": Role.ADMIN.value, "password_hash": _hash(bootstrap_admin_password)}
            }
            store.write_doc("users.json", users)

    # -- user management ---------------------------------------------------------

    def add_user(self, username: str, password: str, role: Role) -> User:
        users = self.store.read_doc("users.json")
        if username in users:
            raise PermissionDenied(f"user {username} already exists")
        users[username] = {"role": role.value, "password_hash": _hash(password)}
        self.store.write_doc("users.json", users)
        return User(username=username, role=role)

    def remove_user(self, username: str) -> None:
        users = self.store.read_doc("users.json")
        if username not in users:
            raise KeyError(username)
        del users[username]
        self.store.write_doc("users.json", users)
        tokens = self.store.read_doc("tokens.json")
        tokens = {t: u for t, u in tokens.items() if u != username}
        self.store.write_doc("tokens.json", tokens)

    def list_users(self) -> list[User]:
        users = self.store.read_doc("users.json")
        return [User(username=u, role=Role(rec["role"])) for u, rec in sorted(users.items())]

    def get_user(self, username: str) -> User:
        users = self.store.read_doc("users.json")
        if username not in users:
            raise KeyError(username)
        return User(username=username, role=Role(users[username]["role"]))

    # -- login / tokens -----------------------------------------------------------

    def login(self, username: str, password: str) -> str:
        users = self.store.read_doc("users.json")
        rec = users.get(username)
        if rec is None or rec["password_hash"] != _hash(password):
            raise AuthenticationFailed("bad username or password")
        token = secrets.token_hex(16)
        tokens = self.store.read_doc("tokens.json")
        tokens[token] = username
        self.store.write_doc("tokens.json", tokens)
        return token

    def resolve(self, token: str) -> User:
        tokens = self.store.read_doc("tokens.json")
        username = tokens.get(token)
        if username is None:
            raise AuthenticationFailed("unknown or expired token")
        return self.get_user(username)
