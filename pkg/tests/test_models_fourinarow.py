"""
Test suite for the four-in-a-row model.

@date: 18.10.2026
"""

import math

import numpy as np
import pytest
from invbinom import EngineConfig, NoExactLikelihood, estimate_parallel
from invbinom.dataset import Dataset
from invbinom.models import (
    Board,
    FourInARowModel,
    FourInARowTheta,
    fourinarow_features,
    fourinarow_generate_positions,
    fourinarow_simulate,
    fourinarow_value,
)
from invbinom.models.fourinarow import (
    BASELINE_THETA,
    BLACK,
    COLS,
    FEATURES,
    W_CENTER,
    WHITE,
    WINDOWS,
)


def board(black: list[tuple[int, int]], white: list[tuple[int, int]]) -> Board:
    cells = np.zeros(36, dtype=np.int8)
    for r, c in black:
        cells[r * COLS + c] = BLACK
    for r, c in white:
        cells[r * COLS + c] = WHITE
    return Board(cells)


def test_line_count() -> None:
    assert len(WINDOWS) == 45


def test_board_alternation() -> None:
    b = Board.empty()
    assert b.to_move == BLACK
    b = b.play(13)
    assert b.to_move == WHITE
    assert b.cells[13] == BLACK
    assert len(b.legal_moves()) == 35


@pytest.mark.parametrize("move", [-1, 36, 13])
def test_illegal_moves(move: int) -> None:
    b = Board.empty().play(13)
    with pytest.raises(ValueError):
        b.play(move)


def test_invalid_piece_counts() -> None:
    with pytest.raises(ValueError):
        board([], [(0, 0)])


def test_encode_decode() -> None:
    b = board([(0, 0), (2, 5)], [(3, 8)])
    assert Board.decode(b.encode()) == b
    assert str(b).count("\n") == 3
    with pytest.raises(ValueError):
        Board.decode("x" * 36)


@pytest.mark.parametrize(
    "black",
    [
        [(0, 2), (0, 3), (0, 4), (0, 5)],
        [(0, 7), (1, 7), (2, 7), (3, 7)],
        [(0, 1), (1, 2), (2, 3), (3, 4)],
        [(3, 0), (2, 1), (1, 2), (0, 3)],
    ],
)
def test_winner(black: list[tuple[int, int]]) -> None:
    b = board(black, [(3, 8), (2, 8), (1, 8)])
    assert b.winner() == BLACK
    assert b.is_terminal()
    with pytest.raises(ValueError):
        b.validate()


@pytest.mark.parametrize(
    "text, reason",
    [
        ("bbbb" + "www" + "." * 29, "four in a row"),
        (("bbwwbbwwb" + "wwbbwwbbw") * 2, "full"),
    ],
)
def test_finished_positions_are_rejected(text: str, reason: str) -> None:
    finished = Board.decode(text)
    assert finished.is_terminal()
    model = FourInARowModel()
    with pytest.raises(ValueError, match=reason):
        fourinarow_features(finished)
    with pytest.raises(ValueError, match=reason):
        fourinarow_simulate(finished, BASELINE_THETA, np.random.default_rng(0))
    with pytest.raises(ValueError, match=reason):
        model.stack_stimuli([text])
    with pytest.raises(ValueError, match=reason):
        model.stack_stimuli([Board.empty(), finished])


def test_features() -> None:
    b = board([(1, 4), (0, 0), (0, 1)], [(3, 8), (3, 6)])
    features = fourinarow_features(b)
    assert features.shape == (2, len(FEATURES))
    black, white = features
    assert black[FEATURES.index("connected_2")] == 1
    assert black[FEATURES.index("center")] > 2.0
    assert white[FEATURES.index("unconnected_2")] == 1
    assert black[FEATURES.index("three")] == white[FEATURES.index("three")] == 0


def test_blocked_lines_do_not_count() -> None:
    b = board([(0, 0), (0, 1)], [(0, 2), (3, 8)])
    assert fourinarow_features(b)[0, FEATURES.index("connected_2")] == 0


def test_empty_board_features() -> None:
    assert not np.any(fourinarow_features(Board.empty()))


def test_value_of_center_opening() -> None:
    theta = FourInARowTheta(math.log(0.01), 5.0, 0.0)
    value = fourinarow_value(Board.empty(), 13, theta, np.random.default_rng(0))
    assert value == pytest.approx(2 * W_CENTER, abs=0.05)


def test_takes_immediate_win() -> None:
    b = board([(0, 0), (0, 1), (0, 2)], [(3, 0), (3, 1), (3, 8)])
    model = FourInARowModel(lapse=0.0)
    for seed in range(5):
        assert model.choose(b, BASELINE_THETA, np.random.default_rng(seed)) == 3


def test_moves_are_legal_and_reproducible() -> None:
    b = board([(1, 4)], [])
    first = [fourinarow_simulate(b, BASELINE_THETA, np.random.default_rng(s)) for s in range(10)]
    second = [fourinarow_simulate(b, BASELINE_THETA, np.random.default_rng(s)) for s in range(10)]
    assert first == second
    assert all(m in b.legal_moves() for m in first)


def test_full_lapse_plays_every_move() -> None:
    model = FourInARowModel(lapse=1.0)
    rng = np.random.default_rng(0)
    moves = {model.choose(Board.empty(), BASELINE_THETA, rng) for _ in range(2000)}
    assert moves == set(range(36))


def test_invalid_model_settings() -> None:
    with pytest.raises(ValueError):
        FourInARowModel(lapse=1.5)
    with pytest.raises(ValueError):
        FourInARowModel(tree_gamma=0.0)


def test_self_play_positions() -> None:
    positions = fourinarow_generate_positions(6, seed=0)
    assert len(positions) == 6
    assert all(not p.is_terminal() for p in positions)


def test_no_exact_likelihood() -> None:
    model = FourInARowModel()
    data = Dataset(model.stack_stimuli([Board.empty()]), np.array([13]), "fourinarow")
    assert not model.has_exact_likelihood
    assert not model.exact_loglik(data, BASELINE_THETA.as_vector())
    assert isinstance(model.exact_loglik(data, BASELINE_THETA.as_vector()).error, NoExactLikelihood)


@pytest.mark.slow
def test_ibs_on_positions() -> None:
    """
    With a lapse every legal move has positive probability, so IBS
    terminates on any position.
    """
    model = FourInARowModel()
    data = model.generate(3, BASELINE_THETA.as_vector(), seed=4)
    report = estimate_parallel(
        model, data, BASELINE_THETA.as_vector(), EngineConfig(per_trial_sample_cap=5000)
    ).unwrap()
    assert report.loglik <= 0.0
    assert report.n_trials == 3
    assert model.chance_loglik(data) < 0


@pytest.mark.slow
def test_ibs_matches_move_frequencies() -> None:
    """
    On a mid-game position, the mean of 200 single-trial IBS estimates of
    each of the three most frequent moves lies within 4 standard errors of
    the log frequency of the move over many simulated choices.
    """
    model = FourInARowModel()
    b = board([(1, 4), (2, 4), (1, 3), (0, 6)], [(2, 3), (1, 5), (0, 4), (3, 4)])
    rng = np.random.default_rng(12)
    draws = 20_000
    counts = np.bincount([model.choose(b, BASELINE_THETA, rng) for _ in range(draws)], minlength=36)
    theta = BASELINE_THETA.as_vector()
    for move in np.argsort(counts)[::-1][:3]:
        frequency = counts[move] / draws
        data = Dataset(model.stack_stimuli([b]), np.array([move]), "fourinarow")
        estimates = np.array(
            [estimate_parallel(model, data, theta, EngineConfig(master_seed=run)).unwrap().loglik for run in range(200)]
        )
        std_error = math.sqrt(estimates.var(ddof=1) / len(estimates) + (1 - frequency) / (frequency * draws))
        assert estimates.mean() == pytest.approx(math.log(frequency), abs=4 * std_error)
