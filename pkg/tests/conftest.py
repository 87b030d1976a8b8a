"""Shared pytest fixtures for linemine tests."""

import logging
import shutil
import subprocess
from collections.abc import Callable, Iterator, Mapping, Sequence
from pathlib import Path

import pytest

from linemine.corpus import RevisionDescriptor, snapshot_dir_name, write_manifest

##############################################################################
# A corpus revision: relative path mapped to file content.
Revision = Mapping[str, str]

requires_git = pytest.mark.skipif(shutil.which("git") is None, reason="git is not installed")


def write_corpus(root: Path, revisions: Sequence[Revision]) -> Path:
    """Write a corpus with one snapshot per revision.

    Args:
        root: The corpus directory.
        revisions: The files of each revision, oldest first.

    Returns:
        The corpus directory.
    """
    root.mkdir(parents=True, exist_ok=True)
    for index, files in enumerate(revisions):
        snapshot = root / snapshot_dir_name(index)
        snapshot.mkdir()
        for name, content in files.items():
            target = snapshot / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(content.encode("utf-8"))
    write_manifest(root, [RevisionDescriptor(index, f"rev{index}") for index in range(len(revisions))])
    return root


@pytest.fixture
def make_corpus(tmp_path: Path) -> Callable[[Sequence[Revision]], Path]:
    """Return a factory that writes a corpus under the temporary directory."""

    def _make(revisions: Sequence[Revision], name: str = "corpus") -> Path:
        return write_corpus(tmp_path / name, revisions)

    return _make


@pytest.fixture
def small_corpus(make_corpus: Callable[[Sequence[Revision]], Path]) -> Path:
    """A three-revision C corpus with one, then two, inserted lines."""
    return make_corpus(
        [
            {"main.c": "int main() {\n    return 0;\n}\n"},
            {"main.c": "int main() {\n    int count = 0;\n    return 0;\n}\n"},
            {"main.c": "int main() {\n    int count = 0;\n    count++;\n    return 0;\n}\n", "util.h": "int count;\n"},
        ]
    )


def _git(repo: Path, *args: str) -> str:
    """Run a git command in a repository, returning its output."""
    return subprocess.run(
        ["git", *args],
        cwd=repo,
        capture_output=True,
        check=True,
        text=True,
    ).stdout


@pytest.fixture
def make_git_repo(tmp_path: Path) -> Callable[[Sequence[Revision]], Path]:
    """Return a factory that builds a git repository with one commit per revision.

    Each revision replaces the whole tree of the `main` branch.
    """

    def _make(revisions: Sequence[Revision]) -> Path:
        repo = tmp_path / "repo"
        repo.mkdir()
        _git(repo, "init", "--quiet", "--initial-branch=main")
        _git(repo, "config", "user.email", "tests@example.com")
        _git(repo, "config", "user.name", "Tests")
        _git(repo, "config", "commit.gpgsign", "false")
        for index, files in enumerate(revisions):
            for child in repo.iterdir():
                if child.name == ".git":
                    continue
                if child.is_dir():
                    shutil.rmtree(child)
                else:
                    child.unlink()
            for name, content in files.items():
                target = repo / name
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(content.encode("utf-8"))
            _git(repo, "add", "--all")
            _git(repo, "commit", "--quiet", "--allow-empty", "-m", f"revision {index}")
        return repo

    return _make


@pytest.fixture
def git_log() -> Callable[[Path], list[str]]:
    """Return a helper listing a repository's first-parent commits, oldest first."""

    def _log(repo: Path) -> list[str]:
        return list(reversed(_git(repo, "rev-list", "--first-parent", "main").split()))

    return _log


@pytest.fixture(autouse=True)
def _restore_logging() -> Iterator[None]:
    """Undo any logging set up by a test, so no handler outlives its stream."""
    logger = logging.getLogger("linemine")
    handlers, level = list(logger.handlers), logger.level
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)
