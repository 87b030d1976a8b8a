"""Git history export into a linemine corpus."""

import logging
import os
import shutil
import subprocess
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from linemine.corpus import (
    MANIFEST_NAME,
    FileFilter,
    RevisionDescriptor,
    snapshot_dir_name,
    write_manifest,
)

##############################################################################
# Name of the lock file that keeps two exports out of one corpus.
LOCK_NAME = ".linemine-export.lock"

log = logging.getLogger(__name__)


class IngestError(Exception):
    """Exception raised when a history can't be exported."""


class InsufficientHistoryError(IngestError):
    """Raised when there are fewer than two revisions to export."""


class ExportInProgressError(IngestError):
    """Raised when another export already holds the corpus lock."""


def check_git_available() -> bool:
    """Check if git command is available in the PATH.

    Returns:
        True if git is available, False otherwise
    """
    return shutil.which("git") is not None


def check_is_git_repository(path: Path) -> bool:
    """Check if the given path is within a git repository.

    Args:
        path: Path to check

    Returns:
        True if path is in a git repository, False otherwise
    """
    try:
        result = subprocess.run(
            ["git", "rev-parse", "--git-dir"],
            cwd=path,
            capture_output=True,
            check=False,
        )
        return result.returncode == 0
    except Exception:
        return False


def list_first_parent_commits(repo_path: Path, branch: str, limit: int | None = None) -> list[str]:
    """List the first-parent commits of a branch, oldest first.

    Args:
        repo_path: The repository to read.
        branch: The branch (or any revision) whose history is wanted.
        limit: Optional cap; when given only the newest `limit` commits
            are listed.

    Returns:
        Commit hashes in chronological order.

    Raises:
        IngestError: If git can't list the history.
    """
    command = ["git", "rev-list", "--first-parent"]
    if limit is not None:
        command.append(f"--max-count={limit}")
    command.extend([branch, "--"])
    try:
        result = subprocess.run(
            command,
            cwd=repo_path,
            capture_output=True,
            check=True,
            text=True,
        )
    except subprocess.CalledProcessError as e:
        raise IngestError(f"ingest-failed: can't list history of {branch!r}: {e.stderr.strip()}") from e
    return list(reversed(result.stdout.split()))


def _git_bytes(repo_path: Path, args: list[str], what: str, stdin: bytes | None = None) -> bytes:
    """Run a git command, returning its raw output.

    Raises:
        IngestError: If the command fails.
    """
    try:
        return subprocess.run(
            ["git", *args],
            cwd=repo_path,
            input=stdin,
            capture_output=True,
            check=True,
        ).stdout
    except subprocess.CalledProcessError as e:
        raise IngestError(f"ingest-failed: can't {what}: {e.stderr.decode(errors='replace').strip()}") from e


def list_tree_blobs(repo_path: Path, commit: str) -> list[tuple[str, str, int]]:
    """List the regular files in the tree of a commit.

    Symbolic links and submodules are left out.

    Args:
        repo_path: The repository to read.
        commit: The commit whose tree is listed.

    Returns:
        `(path, object, size)` for every file, in tree order.

    Raises:
        IngestError: If git can't list the tree.
    """
    output = _git_bytes(repo_path, ["ls-tree", "-r", "-z", "--long", commit], f"list the tree of {commit}")
    blobs: list[tuple[str, str, int]] = []
    for entry in output.split(b"\0"):
        if not entry:
            continue
        meta, _, raw_path = entry.partition(b"\t")
        mode, kind, obj, size = meta.split()
        if kind != b"blob" or mode == b"120000":
            continue
        blobs.append((os.fsdecode(raw_path), obj.decode("ascii"), int(size)))
    return blobs


def read_blobs(repo_path: Path, objects: list[str]) -> list[bytes]:
    """Read the contents of some blobs, exactly as stored.

    Args:
        repo_path: The repository to read.
        objects: The object names of the blobs.

    Returns:
        The contents of each blob, in the order asked for.

    Raises:
        IngestError: If git can't read a blob.
    """
    if not objects:
        return []
    output = _git_bytes(
        repo_path, ["cat-file", "--batch"], "read blobs", stdin="".join(f"{obj}\n" for obj in objects).encode("ascii")
    )
    contents: list[bytes] = []
    position = 0
    for obj in objects:
        header_end = output.find(b"\n", position)
        header = output[position:header_end].split()
        if header_end < 0 or len(header) != 3 or header[1] != b"blob":
            raise IngestError(f"ingest-failed: can't read blob {obj}")
        start = header_end + 1
        contents.append(output[start : start + int(header[2])])
        position = start + int(header[2]) + 1
    return contents


def export_tree(repo_path: Path, commit: str, file_filter: FileFilter, destination: Path) -> int:
    """Write the filtered tree of a commit to a directory.

    Files are copied byte for byte from the object store, so attributes
    such as `export-ignore` and `export-subst` have no effect.

    Args:
        repo_path: The repository to read.
        commit: The commit whose tree is exported.
        file_filter: Decides which files are written.
        destination: The directory to write the tree into.

    Returns:
        The number of files written.

    Raises:
        IngestError: If git can't produce the tree.
    """
    wanted = [
        (path, obj)
        for path, obj, size in list_tree_blobs(repo_path, commit)
        if file_filter.accepts(path, size) and not any(part in ("", ".", "..") for part in path.split("/"))
    ]
    destination.mkdir(parents=True, exist_ok=True)
    for (path, _), content in zip(wanted, read_blobs(repo_path, [obj for _, obj in wanted]), strict=True):
        target = destination.joinpath(*path.split("/"))
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(content)
    return len(wanted)


def _holder_is_gone(lock: Path) -> bool:
    """Check whether the process named in a lock file has exited.

    A lock without a readable process ID is taken to be held.
    """
    try:
        pid = int(lock.read_text(encoding="ascii").strip())
    except (OSError, ValueError):
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return True
    except OSError:
        return False
    return False


@contextmanager
def export_lock(out_root: Path) -> Iterator[None]:
    """Hold the export lock of a corpus for the duration of a block.

    The lock file holds the ID of the exporting process. A lock left
    behind by a process that no longer exists is taken over.

    Args:
        out_root: The corpus being written.

    Raises:
        ExportInProgressError: If the lock is already held.
    """
    lock = out_root / LOCK_NAME
    for _ in range(2):
        try:
            handle = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            break
        except FileExistsError:
            if not _holder_is_gone(lock):
                raise ExportInProgressError(
                    f"ingest-failed: {lock} exists; another export is writing this corpus"
                    " (remove the file if no export is running)"
                ) from None
            log.warning("Removing stale export lock %s", lock)
            lock.unlink(missing_ok=True)
    else:
        raise ExportInProgressError(f"ingest-failed: can't take the export lock {lock}")
    os.write(handle, f"{os.getpid()}\n".encode("ascii"))
    os.close(handle)
    try:
        yield
    finally:
        lock.unlink(missing_ok=True)


def _clear_corpus(out_root: Path) -> None:
    """Remove an earlier export from a corpus directory.

    Args:
        out_root: The corpus directory.
    """
    (out_root / MANIFEST_NAME).unlink(missing_ok=True)
    for child in out_root.iterdir():
        name = child.name
        if child.is_dir() and len(name) == 5 and name[0] == "r" and name[1:].isdigit():
            shutil.rmtree(child)


def export_git_history(
    repo_path: Path,
    branch: str,
    limit: int | None,
    file_filter: FileFilter,
    out_root: Path,
) -> list[RevisionDescriptor]:
    """Export the first-parent history of a branch as a corpus.

    The newest `limit` commits of the branch are written oldest first as
    `r0000`, `r0001`, ... alongside a manifest labelling each revision with
    its commit hash. Any earlier export in `out_root` is replaced, so
    running the export twice with the same inputs gives the same corpus.

    Args:
        repo_path: The git repository to read.
        branch: The branch to follow.
        limit: How many commits to export; `None` exports them all.
        file_filter: Decides which files make up each snapshot.
        out_root: The corpus directory to write.

    Returns:
        The manifest of the exported corpus.

    Raises:
        IngestError: If the repository can't be read.
        InsufficientHistoryError: If fewer than two commits would be exported.
    """
    if limit is not None and limit < 2:
        raise InsufficientHistoryError(f"insufficient-history: a limit of {limit} leaves no revision pair")

    if not check_git_available():
        raise IngestError("ingest-failed: git command not found. Please install git and ensure it's in your PATH.")

    if not repo_path.is_dir() or not check_is_git_repository(repo_path):
        raise IngestError(f"ingest-failed: {repo_path} is not a git repository")

    commits = list_first_parent_commits(repo_path, branch, limit)
    if len(commits) < 2:
        raise InsufficientHistoryError(
            f"insufficient-history: {branch!r} has {len(commits)} commit(s); at least 2 are needed"
        )

    out_root.mkdir(parents=True, exist_ok=True)
    with export_lock(out_root):
        _clear_corpus(out_root)
        manifest: list[RevisionDescriptor] = []
        for index, commit in enumerate(commits):
            written = export_tree(repo_path, commit, file_filter, out_root / snapshot_dir_name(index))
            log.debug("Exported %s as %s (%d files)", commit, snapshot_dir_name(index), written)
            manifest.append(RevisionDescriptor(index=index, label=commit))
        write_manifest(out_root, manifest)
    return manifest
