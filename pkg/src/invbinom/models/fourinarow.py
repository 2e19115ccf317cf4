"""
Four-in-a-row on a 4-by-9 board without gravity: players alternately place
a piece on any empty square, black first, and the first to align four
pieces horizontally, vertically or diagonally wins.

The model picks moves by a pruned best-first search over a heuristic value
function

    V = sum_i w_i f_i(active) - C_act sum_i w_i f_i(passive) + N(0, sigma^2)

where the active player is the one choosing the move. Each feature
instance is dropped with probability delta once per decision; with
probability `lapse` the model plays a uniformly random legal move.

Stimuli are `Board` objects, responses are square indices row * 9 + col.

@date: 18.10.2026
"""

from __future__ import annotations

import logging
import math
from dataclasses import astuple, dataclass, field
from typing import Any, ClassVar, Final, Sequence

import numpy as np
import numpy.typing as npt

from .._checks import ContractViolation
from ._base import Parameter, ParameterSpace, SimulatorModel

logger = logging.getLogger(__name__)

ROWS: Final[int] = 4
COLS: Final[int] = 9
SQUARES: Final[int] = ROWS * COLS
EMPTY: Final[int] = 0
BLACK: Final[int] = 1
WHITE: Final[int] = 2
_SYMBOLS: Final[str] = ".bw"

W_CENTER: Final[float] = 0.60913
W_CONNECTED_2: Final[float] = 0.90444
W_UNCONNECTED_2: Final[float] = 0.45076
W_THREE: Final[float] = 3.4272
W_FOUR: Final[float] = 6.1728
C_ACT: Final[float] = 0.92498
TREE_GAMMA: Final[float] = 0.02
LAPSE: Final[float] = 0.05
WIN_VALUE: Final[float] = 10_000.0

FEATURES: Final[tuple[str, ...]] = ("center", "connected_2", "unconnected_2", "three", "four")


def _windows() -> npt.NDArray[np.intp]:
    windows = []
    for r in range(ROWS):
        for c in range(COLS - 3):
            windows.append([r * COLS + c + k for k in range(4)])
    for c in range(COLS):
        windows.append([k * COLS + c for k in range(4)])
    for c in range(COLS - 3):
        windows.append([k * COLS + c + k for k in range(4)])
        windows.append([(ROWS - 1 - k) * COLS + c + k for k in range(4)])
    return np.array(windows, dtype=np.intp)


# 24 horizontal, 9 vertical and 12 diagonal lines of four squares
WINDOWS: Final = _windows()

_rows, _cols = np.divmod(np.arange(SQUARES), COLS)
CENTER_PROXIMITY: Final = 1.0 / np.hypot(_rows - (ROWS - 1) / 2.0, _cols - (COLS - 1) / 2.0)


@dataclass(frozen=True, eq=False)
class Board:
    """
    A position: `cells` holds EMPTY, BLACK or WHITE for each of the 36
    squares in row-major order. The player to move follows from the piece
    counts.
    """

    cells: npt.NDArray[np.int8]

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.int8).reshape(-1)
        if cells.size != SQUARES or np.any((cells < EMPTY) | (cells > WHITE)):
            ContractViolation("Board", f"expected {SQUARES} squares in {{0, 1, 2}}").throw()
        n_black = int(np.sum(cells == BLACK))
        n_white = int(np.sum(cells == WHITE))
        if n_black - n_white not in (0, 1):
            ContractViolation(
                "Board", f"{n_black} black and {n_white} white pieces cannot alternate"
            ).throw()
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @classmethod
    def empty(cls) -> Board:
        return cls(np.zeros(SQUARES, dtype=np.int8))

    @classmethod
    def decode(cls, text: str) -> Board:
        if len(text) != SQUARES or set(text) - set(_SYMBOLS):
            ContractViolation("Board.decode", f"not a board: {text!r}").throw()
        return cls(np.array([_SYMBOLS.index(ch) for ch in text], dtype=np.int8))

    def encode(self) -> str:
        return "".join(_SYMBOLS[v] for v in self.cells)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Board) and bool(np.array_equal(self.cells, other.cells))

    def __hash__(self) -> int:
        return hash(self.cells.tobytes())

    def __repr__(self) -> str:
        return f"Board({self.encode()!r})"

    def __str__(self) -> str:
        text = self.encode()
        return "\n".join(text[r * COLS : (r + 1) * COLS] for r in range(ROWS))

    @property
    def to_move(self) -> int:
        return BLACK if np.sum(self.cells == BLACK) == np.sum(self.cells == WHITE) else WHITE

    @property
    def pieces(self) -> int:
        return int(np.sum(self.cells != EMPTY))

    def legal_moves(self) -> npt.NDArray[np.intp]:
        return np.flatnonzero(self.cells == EMPTY)

    def play(self, move: int) -> Board:
        if not 0 <= move < SQUARES or self.cells[move] != EMPTY:
            ContractViolation("Board.play", f"square {move} is not an empty square").throw()
        cells = self.cells.copy()
        cells[move] = self.to_move
        return Board(cells)

    def winner(self) -> int | None:
        lines = self.cells[WINDOWS]
        for player in (BLACK, WHITE):
            if np.any(np.all(lines == player, axis=1)):
                return player
        return None

    def is_terminal(self) -> bool:
        return self.winner() is not None or self.pieces == SQUARES

    def validate(self) -> Board:
        """
        Rejects finished games, which have no move to predict.
        """
        if (player := self.winner()) is not None:
            ContractViolation("Board", f"player {player} already has four in a row").throw()
        if self.pieces == SQUARES:
            ContractViolation("Board", "the board is full").throw()
        return self


@dataclass(frozen=True)
class FourInARowTheta:
    eta: float
    xi: float
    delta: float

    @property
    def sigma(self) -> float:
        return math.exp(self.eta)

    @classmethod
    def from_vector(cls, theta: npt.ArrayLike) -> FourInARowTheta:
        eta, xi, delta = np.asarray(theta, dtype=np.float64)
        return cls(float(eta), float(xi), float(delta))

    def as_vector(self) -> npt.NDArray[np.float64]:
        return np.array(astuple(self))


BASELINE_THETA: Final = FourInARowTheta(math.log(1.0), 5.0, 0.2)

FOURINAROW_SPACE: Final = ParameterSpace(
    (
        Parameter("eta", math.log(0.01), math.log(5.0), math.log(0.2), math.log(3.0)),
        Parameter("xi", 0.01, 10.0, 1.0, 10.0),
        Parameter("delta", 0.0, 1.0, 0.0, 0.5),
    )
)


def _window_scores(
    cells: npt.NDArray[np.int8], player: int
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64]]:
    """
    Weighted pattern score of every line for `player` on a batch of boards.

    Returns
    -------
    tuple
        (scores of shape (B, 45), pattern class index per line, -1 where the
        line holds no pattern of `player`)
    """
    lines = cells[:, WINDOWS]
    own = lines == player
    blocked = np.any((lines != player) & (lines != EMPTY), axis=2)
    count = np.where(blocked, 0, own.sum(axis=2))
    adjacent = np.any(own[:, :, :-1] & own[:, :, 1:], axis=2)
    pattern = np.full(count.shape, -1, dtype=np.int64)
    pattern[(count == 2) & adjacent] = 1
    pattern[(count == 2) & ~adjacent] = 2
    pattern[count == 3] = 3
    pattern[count == 4] = 4
    weights = np.array([0.0, W_CONNECTED_2, W_UNCONNECTED_2, W_THREE, W_FOUR, 0.0])
    return weights[pattern], pattern


def fourinarow_features(board: Board) -> npt.NDArray[np.float64]:
    """
    Feature values of a board for each player.

    Returns
    -------
    np.ndarray
        Array of shape (2, 5): rows black then white, columns in `FEATURES`
        order. The center feature sums the inverse distances of a player's
        pieces to the board center; the others count four-square lines
        free of opponent pieces holding the pattern.
    """
    if not isinstance(board, Board):
        ContractViolation("fourinarow_features", f"not a board: {board!r}").throw()
    board.validate()
    features = np.zeros((2, len(FEATURES)))
    for row, player in enumerate((BLACK, WHITE)):
        features[row, 0] = float(np.sum(CENTER_PROXIMITY[board.cells == player]))
        _, pattern = _window_scores(board.cells[None, :], player)
        for k in range(1, len(FEATURES)):
            features[row, k] = float(np.sum(pattern == k))
    return features


@dataclass(frozen=True)
class _DropMask:
    lines: npt.NDArray[np.bool_]
    squares: npt.NDArray[np.bool_]

    @classmethod
    def draw(cls, delta: float, rng: np.random.Generator) -> _DropMask:
        # index 0 unused, players are 1 and 2
        return cls(
            rng.random((3, len(WINDOWS))) >= delta, rng.random((3, SQUARES)) >= delta
        )


def _player_value(
    cells: npt.NDArray[np.int8], player: int, keep: _DropMask
) -> npt.NDArray[np.float64]:
    scores, _ = _window_scores(cells, player)
    center = (cells == player) * (W_CENTER * CENTER_PROXIMITY * keep.squares[player])
    return scores @ keep.lines[player] + center.sum(axis=1)


def _evaluate(
    cells: npt.NDArray[np.int8],
    active: int,
    sigma: float,
    keep: _DropMask,
    rng: np.random.Generator,
) -> npt.NDArray[np.float64]:
    passive = BLACK + WHITE - active
    value = _player_value(cells, active, keep) - C_ACT * _player_value(cells, passive, keep)
    return value + sigma * rng.standard_normal(len(cells))


def fourinarow_value(
    board: Board, move: int, theta: FourInARowTheta, rng: np.random.Generator
) -> float:
    """
    Noisy heuristic value of playing `move` on `board`, for the player to
    move, with a fresh draw of dropped features.
    """
    child = board.play(move)
    keep = _DropMask.draw(theta.delta, rng)
    return float(_evaluate(child.cells[None, :], board.to_move, theta.sigma, keep, rng)[0])


@dataclass
class _Node:
    cells: npt.NDArray[np.int8]
    to_move: int
    # value for the player who moved into this node
    value: float = 0.0
    terminal: bool = False
    children: dict[int, _Node] = field(default_factory=dict)


class _Search:
    def __init__(
        self, theta: FourInARowTheta, expansions: int, rng: np.random.Generator
    ) -> None:
        self.theta = theta
        self.expansions = expansions
        self.rng = rng
        self.keep = _DropMask.draw(theta.delta, rng)

    def expand(self, node: _Node) -> None:
        moves = np.flatnonzero(node.cells == EMPTY)
        children = np.repeat(node.cells[None, :], len(moves), axis=0)
        children[np.arange(len(moves)), moves] = node.to_move
        values = _evaluate(children, node.to_move, self.theta.sigma, self.keep, self.rng)
        wins = np.any(np.all(children[:, WINDOWS] == node.to_move, axis=2), axis=1)
        full = np.all(children != EMPTY, axis=1)
        values = np.where(wins, WIN_VALUE, np.where(full, 0.0, values))
        keep = values >= values.max() - self.theta.xi
        next_player = BLACK + WHITE - node.to_move
        for move, cells, value, won, filled in zip(
            moves[keep], children[keep], values[keep], wins[keep], full[keep]
        ):
            node.children[int(move)] = _Node(
                cells, next_player, float(value), bool(won or filled)
            )

    @staticmethod
    def best(node: _Node) -> tuple[int, _Node]:
        # lowest square index among ties
        return max(node.children.items(), key=lambda item: (item[1].value, -item[0]))

    def run(self, root: _Node) -> int:
        self.expand(root)
        for _ in range(self.expansions - 1):
            path = [root]
            node = root
            while node.children:
                node = self.best(node)[1]
                path.append(node)
            if node.terminal:
                break
            self.expand(node)
            for visited in reversed(path[1:]):
                visited.value = -self.best(visited)[1].value
        return self.best(root)[0]


class FourInARowModel(SimulatorModel):
    """
    Heuristic search model of four-in-a-row moves, with no tractable
    likelihood.

    Parameters
    ----------
    lapse: float
        Probability of a uniformly random move.
    tree_gamma: float
        Inverse size of the search tree; the search expands ceil(1 / tree_gamma)
        nodes.
    """

    name: ClassVar[str] = "fourinarow"
    default_trials: ClassVar[int] = 100

    def __init__(self, lapse: float = LAPSE, tree_gamma: float = TREE_GAMMA) -> None:
        if not 0.0 <= lapse <= 1.0 or not 0.0 < tree_gamma <= 1.0:
            ContractViolation("FourInARowModel", f"lapse={lapse}, tree_gamma={tree_gamma}").throw()
        self.lapse = lapse
        self.expansions = math.ceil(1.0 / tree_gamma)

    def parameter_space(self) -> ParameterSpace:
        return FOURINAROW_SPACE

    def response_space(self, stimulus: Board) -> tuple[int, ...]:
        return tuple(int(m) for m in stimulus.legal_moves())

    def stack_stimuli(self, items: Sequence[Any]) -> npt.NDArray[np.object_]:
        boards = np.empty(len(items), dtype=object)
        for i, item in enumerate(items):
            boards[i] = (item if isinstance(item, Board) else Board.decode(item)).validate()
        return boards

    def choose(self, board: Board, theta: FourInARowTheta, rng: np.random.Generator) -> int:
        moves = board.validate().legal_moves()
        if rng.random() < self.lapse:
            return int(rng.choice(moves))
        root = _Node(board.cells.copy(), board.to_move)
        return _Search(theta, self.expansions, rng).run(root)

    def simulate(
        self,
        stimuli: npt.NDArray[np.object_],
        theta: npt.NDArray[np.float64],
        rng: np.random.Generator,
    ) -> npt.NDArray[np.int64]:
        params = FourInARowTheta.from_vector(theta)
        return np.array([self.choose(board, params, rng) for board in stimuli], dtype=np.int64)

    def sample_stimuli(self, n: int, rng: np.random.Generator) -> npt.NDArray[np.object_]:
        return self.stack_stimuli(self_play_positions(n, rng, self))

    def encode_stimulus(self, stimulus: Board) -> str:
        return stimulus.encode()


def self_play_positions(
    count: int,
    rng: np.random.Generator,
    model: FourInARowModel | None = None,
    theta: FourInARowTheta = BASELINE_THETA,
    per_game: int = 3,
) -> list[Board]:
    """
    Collects non-terminal positions from games the model plays against
    itself, each game opened with up to two random moves per player. At
    most `per_game` positions are kept from each game.
    """
    if count < 1:
        ContractViolation("fourinarow_generate_positions", f"count={count}").throw()
    model = model or FourInARowModel()
    positions: list[Board] = []
    games = 0
    while len(positions) < count:
        board = Board.empty()
        opening = int(rng.integers(0, 5))
        history = []
        while not board.is_terminal():
            history.append(board)
            if board.pieces < opening:
                move = int(rng.choice(board.legal_moves()))
            else:
                move = model.choose(board, theta, rng)
            board = board.play(move)
        picks = rng.choice(len(history), size=min(per_game, len(history)), replace=False)
        positions.extend(history[i] for i in sorted(picks))
        games += 1
    logger.debug("Collected %d positions from %d self-play games", count, games)
    return positions[:count]


def fourinarow_generate_positions(count: int, seed: int) -> list[Board]:
    return self_play_positions(count, np.random.default_rng(seed))


def fourinarow_simulate(board: Board, theta: FourInARowTheta, rng: np.random.Generator) -> int:
    return FourInARowModel().choose(board, theta, rng)
