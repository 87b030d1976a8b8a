"""Tests for the ingest module."""

import os
import subprocess
from collections.abc import Callable
from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest
from conftest import requires_git

from linemine.corpus import FileFilter, load_manifest, snapshot_dir_name
from linemine.ingest import (
    LOCK_NAME,
    ExportInProgressError,
    IngestError,
    InsufficientHistoryError,
    check_git_available,
    check_is_git_repository,
    export_git_history,
    export_lock,
    list_first_parent_commits,
    read_blobs,
)

HISTORY = [
    {"main.c": "int main() {\n}\n", "README.md": "# demo\n"},
    {"main.c": "int main() {\n    return 0;\n}\n", "README.md": "# demo\n"},
    {"main.c": "int main() {\n    return 0;\n}\n", "src/App.java": "class App {}\n"},
]


def _tree(root: Path) -> dict[str, bytes]:
    """Read every file under a directory."""
    return {path.relative_to(root).as_posix(): path.read_bytes() for path in sorted(root.rglob("*")) if path.is_file()}


class TestCheckGitAvailable:
    """Tests for check_git_available function."""

    def test_git_available(self) -> None:
        """Test when git is available in PATH."""
        with patch("shutil.which", return_value="/usr/bin/git"):
            assert check_git_available() is True

    def test_git_not_available(self) -> None:
        """Test when git is not available in PATH."""
        with patch("shutil.which", return_value=None):
            assert check_git_available() is False


class TestCheckIsGitRepository:
    """Tests for check_is_git_repository function."""

    def test_is_git_repository(self) -> None:
        """Test when path is in a git repository."""
        with patch("subprocess.run") as mock_run:
            mock_run.return_value = MagicMock(returncode=0)
            assert check_is_git_repository(Path("/some/path")) is True
            mock_run.assert_called_once_with(
                ["git", "rev-parse", "--git-dir"],
                cwd=Path("/some/path"),
                capture_output=True,
                check=False,
            )

    def test_not_git_repository(self) -> None:
        """Test when path is not in a git repository."""
        with patch("subprocess.run") as mock_run:
            mock_run.return_value = MagicMock(returncode=128)
            assert check_is_git_repository(Path("/some/path")) is False

    def test_subprocess_exception(self) -> None:
        """Test when subprocess raises an exception."""
        with patch("subprocess.run", side_effect=OSError("Test error")):
            assert check_is_git_repository(Path("/some/path")) is False


class TestListFirstParentCommits:
    """Tests for list_first_parent_commits."""

    def test_oldest_first(self) -> None:
        """git lists newest first; the result is oldest first."""
        with patch("subprocess.run") as mock_run:
            mock_run.return_value = MagicMock(stdout="c3\nc2\nc1\n")
            assert list_first_parent_commits(Path("/repo"), "main", 3) == ["c1", "c2", "c3"]
            mock_run.assert_called_once_with(
                ["git", "rev-list", "--first-parent", "--max-count=3", "main", "--"],
                cwd=Path("/repo"),
                capture_output=True,
                check=True,
                text=True,
            )

    def test_no_limit(self) -> None:
        """Without a limit the whole history is listed."""
        with patch("subprocess.run") as mock_run:
            mock_run.return_value = MagicMock(stdout="c1\n")
            list_first_parent_commits(Path("/repo"), "main")
            assert mock_run.call_args.args[0] == ["git", "rev-list", "--first-parent", "main", "--"]

    def test_git_failure(self) -> None:
        """A failing git command is an ingest failure."""
        error = subprocess.CalledProcessError(128, ["git"], stderr="fatal: bad revision 'nope'\n")
        with patch("subprocess.run", side_effect=error), pytest.raises(IngestError, match="ingest-failed"):
            list_first_parent_commits(Path("/repo"), "nope")


class TestReadBlobs:
    """Tests for read_blobs."""

    def test_contents_in_order(self) -> None:
        """Blobs are split out of git's batch output in the order asked for."""
        output = b"aaa blob 3\nx;\n\nbbb blob 0\n\n"
        with patch("subprocess.run", return_value=MagicMock(stdout=output)) as mock_run:
            assert read_blobs(Path("."), ["aaa", "bbb"]) == [b"x;\n", b""]
        assert mock_run.call_args.kwargs["input"] == b"aaa\nbbb\n"

    def test_missing_object(self) -> None:
        """An object git can't find is an ingest failure."""
        with (
            patch("subprocess.run", return_value=MagicMock(stdout=b"aaa missing\n")),
            pytest.raises(IngestError, match="ingest-failed"),
        ):
            read_blobs(Path("."), ["aaa"])

    def test_nothing_to_read(self) -> None:
        """Asking for no blobs doesn't run git."""
        with patch("subprocess.run") as mock_run:
            assert read_blobs(Path("."), []) == []
        mock_run.assert_not_called()


class TestExportLock:
    """Tests for export_lock."""

    def test_lock_is_released(self, tmp_path: Path) -> None:
        """The lock file only exists while the lock is held."""
        with export_lock(tmp_path):
            assert (tmp_path / LOCK_NAME).exists()
        assert not (tmp_path / LOCK_NAME).exists()

    def test_lock_is_released_on_error(self, tmp_path: Path) -> None:
        """An error inside the block still releases the lock."""
        with pytest.raises(RuntimeError), export_lock(tmp_path):
            raise RuntimeError("boom")
        assert not (tmp_path / LOCK_NAME).exists()

    def test_second_holder_is_refused(self, tmp_path: Path) -> None:
        """Only one export at a time may write a corpus."""
        with export_lock(tmp_path), pytest.raises(ExportInProgressError), export_lock(tmp_path):
            pass

    def test_lock_names_its_holder(self, tmp_path: Path) -> None:
        """The lock file holds the ID of the exporting process."""
        with export_lock(tmp_path):
            assert (tmp_path / LOCK_NAME).read_text(encoding="ascii").strip() == str(os.getpid())

    def test_live_holder_is_reported(self, tmp_path: Path) -> None:
        """A lock held by a running process is refused, naming the file to remove."""
        (tmp_path / LOCK_NAME).write_text(f"{os.getpid()}\n", encoding="ascii")
        with pytest.raises(ExportInProgressError, match="no export is running"), export_lock(tmp_path):
            pass
        assert (tmp_path / LOCK_NAME).exists()

    def test_stale_lock_is_taken_over(self, tmp_path: Path) -> None:
        """A lock left behind by a process that has gone is replaced."""
        (tmp_path / LOCK_NAME).write_text("999999\n", encoding="ascii")
        with patch("os.kill", side_effect=ProcessLookupError), export_lock(tmp_path):
            assert (tmp_path / LOCK_NAME).read_text(encoding="ascii").strip() == str(os.getpid())
        assert not (tmp_path / LOCK_NAME).exists()


class TestExportGitHistoryFailures:
    """Tests for the ways export_git_history refuses to run."""

    @pytest.mark.parametrize("limit", [0, 1])
    def test_limit_too_small(self, tmp_path: Path, limit: int) -> None:
        """A limit below two can't give a revision pair."""
        with pytest.raises(InsufficientHistoryError, match="insufficient-history"):
            export_git_history(tmp_path, "main", limit, FileFilter(), tmp_path / "out")

    def test_git_not_installed(self, tmp_path: Path) -> None:
        """Without git there is nothing to export."""
        with (
            patch("shutil.which", return_value=None),
            pytest.raises(IngestError, match="git command not found"),
        ):
            export_git_history(tmp_path, "main", None, FileFilter(), tmp_path / "out")

    def test_not_a_repository(self, tmp_path: Path) -> None:
        """A directory that isn't a repository is refused."""
        with (
            patch("shutil.which", return_value="/usr/bin/git"),
            patch("linemine.ingest.check_is_git_repository", return_value=False),
            pytest.raises(IngestError, match="not a git repository"),
        ):
            export_git_history(tmp_path, "main", None, FileFilter(), tmp_path / "out")

    def test_missing_directory(self, tmp_path: Path) -> None:
        """A repository path that doesn't exist is refused."""
        with (
            patch("shutil.which", return_value="/usr/bin/git"),
            pytest.raises(IngestError, match="ingest-failed"),
        ):
            export_git_history(tmp_path / "missing", "main", None, FileFilter(), tmp_path / "out")


@requires_git
class TestExportGitHistory:
    """Tests for export_git_history against real repositories."""

    def test_exports_every_commit(
        self,
        tmp_path: Path,
        make_git_repo: Callable[..., Path],
        git_log: Callable[[Path], list[str]],
    ) -> None:
        """Each commit becomes a filtered snapshot, labelled with its hash."""
        repo = make_git_repo(HISTORY)
        out = tmp_path / "corpus"
        manifest = export_git_history(repo, "main", None, FileFilter(), out)
        assert [revision.label for revision in manifest] == git_log(repo)
        assert load_manifest(out) == manifest
        assert _tree(out / snapshot_dir_name(0)) == {"main.c": b"int main() {\n}\n"}
        assert _tree(out / snapshot_dir_name(2)) == {
            "main.c": b"int main() {\n    return 0;\n}\n",
            "src/App.java": b"class App {}\n",
        }
        assert not (out / LOCK_NAME).exists()

    def test_export_attributes_are_ignored(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """Snapshots match the committed files byte for byte, whatever .gitattributes says."""
        files = {
            ".gitattributes": "vendor/*.c export-ignore\nver.h export-subst\n",
            "main.c": "int main() {\n}\n",
            "vendor/lib.c": "int lib;\n",
            "ver.h": "/* $Format:%H$ */\n",
        }
        revisions = [files, {**files, "main.c": "int main() {\n    return 0;\n}\n"}]
        out = tmp_path / "corpus"
        export_git_history(make_git_repo(revisions), "main", None, FileFilter(), out)
        for index, revision in enumerate(revisions):
            assert _tree(out / snapshot_dir_name(index)) == {
                name: content.encode("utf-8") for name, content in revision.items() if name != ".gitattributes"
            }

    def test_limit_keeps_the_newest_commits(
        self,
        tmp_path: Path,
        make_git_repo: Callable[..., Path],
        git_log: Callable[[Path], list[str]],
    ) -> None:
        """A limit exports the newest commits, oldest first."""
        repo = make_git_repo(HISTORY)
        manifest = export_git_history(repo, "main", 2, FileFilter(), tmp_path / "corpus")
        assert [revision.label for revision in manifest] == git_log(repo)[1:]
        assert [revision.index for revision in manifest] == [0, 1]

    def test_rerun_is_identical(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """Exporting twice gives the same corpus."""
        repo = make_git_repo(HISTORY)
        out = tmp_path / "corpus"
        export_git_history(repo, "main", None, FileFilter(), out)
        first = _tree(out)
        export_git_history(repo, "main", None, FileFilter(), out)
        assert _tree(out) == first

    def test_rerun_clears_old_snapshots(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """A shorter re-export leaves no stale snapshots behind."""
        repo = make_git_repo(HISTORY)
        out = tmp_path / "corpus"
        export_git_history(repo, "main", None, FileFilter(), out)
        export_git_history(repo, "main", 2, FileFilter(), out)
        assert not (out / snapshot_dir_name(2)).exists()
        assert len(load_manifest(out)) == 2

    def test_single_commit(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """One commit isn't a history."""
        repo = make_git_repo(HISTORY[:1])
        with pytest.raises(InsufficientHistoryError, match="insufficient-history"):
            export_git_history(repo, "main", None, FileFilter(), tmp_path / "corpus")

    def test_unknown_branch(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """A branch that doesn't exist is an ingest failure."""
        repo = make_git_repo(HISTORY)
        with pytest.raises(IngestError, match="ingest-failed"):
            export_git_history(repo, "no-such-branch", None, FileFilter(), tmp_path / "corpus")

    def test_held_lock(self, tmp_path: Path, make_git_repo: Callable[..., Path]) -> None:
        """An export in progress keeps a second one out."""
        repo = make_git_repo(HISTORY)
        out = tmp_path / "corpus"
        out.mkdir()
        (out / LOCK_NAME).touch()
        with pytest.raises(ExportInProgressError):
            export_git_history(repo, "main", None, FileFilter(), out)

    def test_follows_first_parents(
        self,
        tmp_path: Path,
        make_git_repo: Callable[..., Path],
        git_log: Callable[[Path], list[str]],
    ) -> None:
        """Commits only reachable through a merged branch aren't exported."""
        repo = make_git_repo(HISTORY[:2])

        def git(*args: str) -> None:
            subprocess.run(["git", *args], cwd=repo, capture_output=True, check=True)

        git("checkout", "--quiet", "-b", "feature")
        (repo / "feature.c").write_text("int feature;\n")
        git("add", "feature.c")
        git("commit", "--quiet", "-m", "feature work")
        git("checkout", "--quiet", "main")
        git("merge", "--quiet", "--no-ff", "--no-edit", "feature")

        manifest = export_git_history(repo, "main", None, FileFilter(), tmp_path / "corpus")
        assert [revision.label for revision in manifest] == git_log(repo)
        assert len(manifest) == 3
        assert "feature.c" in _tree(tmp_path / "corpus" / snapshot_dir_name(2))
