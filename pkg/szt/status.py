import asyncio
import copy
import hashlib
import json
import os
import pathlib
import tempfile
import threading
import uuid

from watchdog.events import (
    DirModifiedEvent,
    FileModifiedEvent,
    FileMovedEvent,
    FileSystemEventHandler,
)
from watchdog.observers import Observer

from szt.typing import (
    ContextManager,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    PathLike,
    Self,
    Tuple,
    Union,
)

StatusRecord = Union[str, dict]
"""
A single status update, either plain text or a dictionary with an ``info`` key that identifies its kind.
"""

# `hashlib.file_digest` is available in Python 3.11+
if hasattr(hashlib, 'file_digest'):
    file_digest = hashlib.file_digest
else:
    def file_digest(file, hash_cls):
        hash = hash_cls()
        while (chunk := file.read(1 << 16)):
            hash.update(chunk)
        return hash


class Status:
    """
    Reports the progress of a command (e.g., a Monte Carlo estimate, a training run, or a verification suite).

    Updates are made through the :func:`szt.status.update`, :func:`szt.status.progress`, and
    :func:`szt.status.derive` shortcuts, which accept `None` so that library functions can be called without any
    reporting. The updates are written to a JSON status file, which is followed by a :class:`StatusReader`.

    Nested status objects (see :meth:`derive`) report sub-tasks, like the checks of a suite, each in a file of its
    own. Writes are serialized by a lock, since commands may report from worker threads.
    """

    id: uuid.UUID
    """
    Identifies the status file of this object.
    """

    path: Optional[pathlib.Path]
    """
    The directory of the status files, or `None` if the directory of the :attr:`parent` is used.
    """

    parent: Optional[Self]
    """
    The status object that this object is nested in.
    """

    data: List[Union[StatusRecord, dict]]
    """
    The permanent updates, and links to the status files of nested objects.
    """

    def __init__(self, parent: Optional[Self] = None, path: Optional[PathLike] = None):
        assert (parent is None) != (path is None), 'Exactly one of `parent` and `path` is required'
        self.id = uuid.uuid4()
        self.path = None if path is None else pathlib.Path(path)
        self.parent = parent
        self.data = list()
        self._intermediate = None
        self._lock = parent._lock if parent else threading.RLock()

    @property
    def root(self) -> Self:
        """
        The outermost status object.
        """
        return self if self.parent is None else self.parent.root

    @property
    def filepath(self) -> pathlib.Path:
        """
        The status file written by this object.
        """
        return self.root.path / f'{self.id}.json'

    def update(self) -> None:
        """
        Rewrite the status file.

        The file is replaced atomically, so that readers never observe partially written JSON.
        """
        with self._lock:
            data = list(self.data)
            if self._intermediate is not None:
                data.append(dict(expand = str(self._intermediate.filepath), content_type = 'intermediate'))
            staging = self.filepath.with_suffix('.tmp')
            staging.write_text(json.dumps(data))
            os.replace(staging, self.filepath)

    def derive(self) -> Self:
        """
        Create a nested status object, linked at the end of this one.
        """
        with self._lock:
            self._intermediate = None
            child = Status(self)
            child.update()
            self.data.append(dict(expand = str(child.filepath)))
            self.update()
            return child

    def write(self, status: StatusRecord) -> None:
        """
        Append a permanent update, which replaces any pending intermediate update.
        """
        with self._lock:
            self._intermediate = None
            self.data.append(status)
            self.update()

    def intermediate(self, status: Optional[StatusRecord] = None) -> None:
        """
        Set the intermediate update, which is replaced by the next update of this object.

        The intermediate update lives in a nested status file. If `status` is `None`, the intermediate update is
        cleared.
        """
        with self._lock:
            if status is None:
                self._intermediate = None
                self.update()
                return

            # Write the nested file first, so that a linked intermediate file is never empty
            link_required = self._intermediate is None
            if link_required:
                self._intermediate = Status(self)
            self._intermediate.data = [status]
            self._intermediate.update()
            if link_required:
                self.update()

    def progress(
            self,
            iterable: Iterable,
            iterations: Optional[int] = None,
            details: Optional[StatusRecord] = None,
        ) -> Iterator:
        """
        Yield the items of `iterable`, and report the number of items processed as intermediate updates.

        The intermediate update is cleared when the iteration ends, breaks, or fails.

        Arguments:
            iterable: The items.
            iterations: The expected number of items. Defaults to ``len(iterable)``.
            details: Passed on with each update (e.g., the name of the loop).

        Raises:
            AssertionError: If `iterable` yields more than `iterations` items.
        """
        max_steps = len(iterable) if iterations is None else iterations
        try:
            for step, item in enumerate(iterable):
                assert step < max_steps, f'More than {max_steps} items'
                self.intermediate(
                    dict(
                        info = 'progress',
                        details = details,
                        progress = step / max_steps,
                        step = step,
                        max_steps = max_steps,
                    )
                )
                yield item
        finally:
            self.intermediate(None)


def create(path: Optional[PathLike] = None) -> ContextManager[Status]:
    """
    Create a status object, which writes to `path`, or to a temporary directory that is removed afterwards.

    .. runblock:: pycon

        >>> import szt.status
        >>> with szt.status.create() as status:
        ...    szt.status.update(status, info = 'command', command = 'verify')
        ...    print(status.filepath.read_text())
    """
    class StatusContext:

        def __enter__(self) -> Status:
            if path is None:
                self.directory = tempfile.TemporaryDirectory()
                return Status(path = self.directory.name)
            else:
                self.directory = None
                pathlib.Path(path).mkdir(parents = True, exist_ok = True)
                return Status(path = path)

        def __exit__(self, exc_type, exc_val, exc_tb) -> None:
            if self.directory is not None:
                self.directory.cleanup()
                self.directory = None

    return StatusContext()


class Cursor:
    """
    Points to an element of a nested list structure.

    The position is the sequence of indices, one per nesting level. The cursor is advanced in depth-first order, and
    nested lists themselves are stepped into rather than visited.
    """

    data: list
    """
    The nested list structure.
    """

    path: List[int]
    """
    The index of the element on each nesting level.
    """

    def __init__(self, data: Optional[list] = None, other: Optional[Self] = None):
        assert (data is None) != (other is None), 'Exactly one of `data` and `other` is required'
        self.data = other.data if other else data
        self.path = list(other.path) if other else [-1]

    def copy(self) -> Self:
        return Cursor(other = self)

    def get_elements(self) -> Optional[list]:
        """
        The elements along the path, starting with :attr:`data`, or `None` if the path does not exist (anymore).
        """
        elements = [self.data]
        for pos in self.path:
            parent = elements[-1]
            if not isinstance(parent, list) or not -len(parent) <= pos < len(parent):
                return None
            elements.append(parent[pos])
        return elements

    @property
    def valid(self) -> bool:
        return self.get_elements() is not None

    @property
    def intermediate(self) -> Optional[bool]:
        """
        Whether the cursor points to an intermediate update (`None` for an invalid cursor).
        """
        elements = self.get_elements()
        if elements is None:
            return None
        return isinstance(elements[-1], dict) and elements[-1].get('content_type') == 'intermediate'

    @property
    def parent(self) -> Optional[Self]:
        if len(self.path) <= 1:
            return None
        parent = self.copy()
        parent.path.pop()
        return parent

    @property
    def parents(self) -> Iterator[Self]:
        cursor = self.parent
        while cursor is not None:
            yield cursor
            cursor = cursor.parent

    def increment(self) -> Optional[Self]:
        """
        Move to the next sibling, and return the cursor if it is valid.
        """
        self.path[-1] += 1
        return self if self.valid else None

    def find_next_child_or_sibling(self) -> Optional[Self]:
        """
        A new cursor to the next sibling, or to the first element within it if the sibling is a list.
        """
        cursor = self.copy()
        if cursor.increment() is None:
            return None
        if isinstance(cursor.get_elements()[-1], list):
            cursor.path.append(-1)
            return cursor.find_next_child_or_sibling()
        return cursor

    def find_next_element(self) -> Optional[Self]:
        """
        A new cursor to the next element in depth-first order, ascending to the parents if necessary.
        """
        for cursor in (self, *self.parents):
            successor = cursor.find_next_child_or_sibling()
            if successor is not None:
                return successor
        return None

    def has_subsequent_non_intermediate(self) -> bool:
        """
        Whether a permanent update follows somewhere after this position.
        """
        cursor = self.find_next_element()
        while cursor is not None:
            if not cursor.intermediate:
                return True
            cursor = cursor.find_next_element()
        return False


class StatusReader(FileSystemEventHandler):
    """
    Follows the status file of a :class:`Status` object, and its nested status files.

    The files are re-read when `watchdog` reports a modification, and the nested lists of :attr:`data` mirror the
    nesting of the status objects. Each new update is passed to :meth:`handle_new_status`, which subclasses override
    (see :class:`szt.cli.StatusReaderConsoleAdapter`).

    Arguments:
        filepath: The status file of the outermost status object.
        loop: The event loop that processes the updates. Defaults to the running loop.
        blocking: If `True`, the updates are processed on the `watchdog` thread, which is required when the loop is
            blocked by the computation itself.
    """

    filepath: pathlib.Path
    """
    The status file of the outermost status object.
    """

    data: list
    """
    The updates read so far, as nested lists.
    """

    data_frames: Dict[pathlib.Path, list]
    """
    The list of each status file that has been encountered, including :attr:`filepath`.
    """

    file_hashes: Dict[pathlib.Path, str]
    """
    Digests of the status files when they were last read.
    """

    cursor: Cursor
    """
    Points to the latest permanent update that has been handled.
    """

    def __init__(self, filepath: PathLike, loop: Optional[asyncio.AbstractEventLoop] = None, blocking: bool = False):
        self.loop = loop if loop else asyncio.get_running_loop()
        self.blocking = blocking
        self.filepath = pathlib.Path(filepath).resolve()
        self.data = list()
        self.data_frames = {self.filepath: self.data}
        self.file_hashes = dict()
        self.cursor = Cursor(self.data)
        self._intermediate: Optional[Tuple[List[int], dict]] = None
        self._lock = threading.Lock()
        self.update(self.filepath)
        self.check_new_status()

    async def __aenter__(self) -> list:
        self.observer = Observer()
        self.observer.schedule(self, str(self.filepath.parent), recursive = False)
        self.observer.start()
        return self.data

    async def __aexit__(self, exc_type, exc_val, exc_tb) -> None:
        await asyncio.sleep(0.5)  # let the observer deliver pending events
        self.observer.stop()
        self.observer.join()
        self.poll()

    def poll(self) -> None:
        """
        Re-read all status files and handle any new updates, regardless of file system events.
        """
        with self._lock:
            changed = False
            for filepath in list(self.data_frames.keys()):
                changed = self.update(filepath) or changed
            if changed:
                self.check_new_status()

    def update(self, filepath: pathlib.Path) -> bool:
        """
        Re-read the status file at `filepath` if it belongs to the followed status objects and has changed.

        Returns:
            `True` if the contents have changed.
        """
        data_frame = self.data_frames.get(filepath)
        if data_frame is None:
            return False
        try:
            content = filepath.read_bytes()
        except FileNotFoundError:
            return False
        digest = hashlib.sha1(content).hexdigest()
        if self.file_hashes.get(filepath) == digest:
            return False
        try:
            records = json.loads(content)
        except json.decoder.JSONDecodeError:
            return False
        self.file_hashes[filepath] = digest
        data_frame[:] = records

        for idx, record in enumerate(data_frame):
            if isinstance(record, dict) and 'expand' in record:
                child_filepath = pathlib.Path(record['expand']).resolve()
                child = self.data_frames.setdefault(child_filepath, list())
                if record.get('content_type') is None:
                    data_frame[idx] = child
                else:
                    data_frame[idx] = dict(content_type = record['content_type'], content = child)
                self.update(child_filepath)
        return True

    def on_modified(self, event: Union[DirModifiedEvent, FileModifiedEvent]) -> None:
        if isinstance(event, FileModifiedEvent):
            self._on_change(event.src_path)

    def on_moved(self, event: FileMovedEvent) -> None:
        # Status files are replaced by renaming
        if not event.is_directory:
            self._on_change(event.dest_path)

    def _on_change(self, path: str) -> None:
        filepath = pathlib.Path(path).resolve()

        def process():
            with self._lock:
                if self.update(filepath):
                    self.check_new_status()

        if self.blocking:
            process()
        else:
            self.loop.call_soon_threadsafe(process)

    def check_new_status(self) -> None:
        """
        Pass the updates after the :attr:`cursor` to :meth:`handle_new_status`, and advance the cursor.

        The cursor never rests on an intermediate update, unless a permanent update follows it, so that later changes
        of the intermediate update are detected too. An intermediate update that has disappeared is reported as
        cleared.
        """
        found = False
        while (cursor := self.cursor.find_next_element()) is not None:
            found = True
            element = cursor.get_elements()[-1]
            unchanged = (
                cursor.intermediate and self._intermediate is not None and self._intermediate[1] == element
            )
            if not unchanged:
                self._dispatch(list(cursor.path), copy.deepcopy(element))
            if cursor.intermediate and not cursor.has_subsequent_non_intermediate():
                self._intermediate = (list(cursor.path), copy.deepcopy(element))
                break
            self._intermediate = None
            self.cursor = cursor

        if not found and self._intermediate is not None:
            positions, element = self._intermediate
            element['content'] = None
            self._dispatch(positions, element)
            self._intermediate = None

    def _dispatch(self, positions: List[int], element: Union[StatusRecord, dict]) -> None:
        if isinstance(element, dict) and element.get('content_type') == 'intermediate':
            content = element['content']
            self.handle_new_status(positions, status = content[0] if content else None, intermediate = True)
        else:
            self.handle_new_status(positions, status = element, intermediate = False)

    def handle_new_status(self, positions: List[int], status: Optional[StatusRecord], intermediate: bool) -> None:
        """
        Process a new update.

        Arguments:
            positions: The index of the update on each nesting level.
            status: The update, or `None` if an intermediate update has been cleared.
            intermediate: Whether the update is intermediate.
        """
        pass


def update(status: Optional[Status], plain_text: Optional[str] = None, intermediate: bool = False, **kwargs) -> None:
    """
    Write a permanent (or intermediate) update, either plain text or a dictionary built from `kwargs`.

    Does nothing if `status` is `None`.
    """
    assert plain_text is None or len(kwargs) == 0, 'Cannot combine `plain_text` and `kwargs`'
    if status is None:
        return
    record = dict(**kwargs) if kwargs else plain_text
    if intermediate:
        status.intermediate(record)
    else:
        assert record is not None, 'An update requires `plain_text` or `kwargs`'
        status.write(record)


def derive(status: Optional[Status]) -> Optional[Status]:
    """
    Shortcut for :meth:`Status.derive`, which passes `None` through.
    """
    return None if status is None else status.derive()


def progress(
        status: Optional[Status],
        iterable: Iterable,
        iterations: Optional[int] = None,
        details: Optional[StatusRecord] = None,
    ) -> Iterable:
    """
    Shortcut for :meth:`Status.progress`, which returns `iterable` itself if `status` is `None`.
    """
    return iterable if status is None else status.progress(iterable, iterations, details)
