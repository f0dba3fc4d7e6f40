"""Test-wide guard rails.

Analyzed samples are hostile by assumption, so the whole suite runs with
network and shell access stubbed out. Any attempt to open a socket or
spawn a process fails loudly instead of escaping the sandbox.
"""
from __future__ import annotations

import os
import socket
import subprocess

import pytest


class EscapeAttempt(RuntimeError):
    """Something under test tried to reach outside the interpreter."""


def _refuse(*_args, **_kwargs):
    raise EscapeAttempt("network and shell access are disabled during tests")


_PATCHES = [
    (socket, "socket", _refuse),
    (socket, "create_connection", _refuse),
    (socket, "socketpair", _refuse),
    (subprocess, "Popen", _refuse),
    (subprocess, "run", _refuse),
    (subprocess, "call", _refuse),
    (subprocess, "check_call", _refuse),
    (subprocess, "check_output", _refuse),
    (os, "system", _refuse),
    (os, "popen", _refuse),
    (os, "execv", _refuse),
    (os, "execve", _refuse),
    (os, "spawnl", _refuse),
    (os, "spawnv", _refuse),
]


@pytest.fixture(autouse=True, scope="session")
def no_outside_world():
    saved = [(mod, name, getattr(mod, name)) for mod, name, _ in _PATCHES]
    for mod, name, stub in _PATCHES:
        setattr(mod, name, stub)
    try:
        yield
    finally:
        for mod, name, original in saved:
            setattr(mod, name, original)
