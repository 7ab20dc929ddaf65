# Copyright 2026 The bvq Authors.
#
#    Licensed under the Apache License, Version 2.0 (the "License");
#    you may not use this file except in compliance with the License.
#    You may obtain a copy of the License at
#
#        http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS,
#    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#    See the License for the specific language governing permissions and
#    limitations under the License.

import itertools
import math
import os
from pathlib import Path

import numpy as np
import pytest

import bvq

DATA = Path(os.environ.get("BVQ_TEST_DATA_DIR", Path(__file__).parents[1] / "data"))


def test_qubo_ising_round_trip():
    q = bvq.QuboProblem([1.0, 2.0], {(0, 1): 4.0})
    assert q.energy("11") == 7.0
    m = bvq.qubo_to_ising(q)
    assert m.h == pytest.approx([1.5, 2.0])
    assert m.offset == pytest.approx(2.5)
    back = bvq.ising_to_qubo(m)
    for bits in itertools.product([0, 1], repeat=2):
        spins = [2 * b - 1 for b in bits]
        assert m.energy(spins) == pytest.approx(q.energy(list(bits)))
        assert back.energy(list(bits)) == pytest.approx(q.energy(list(bits)))
    assert bvq.QuboProblem.loads(q.dumps()) == q


def test_samplers_agree_on_a_small_problem():
    q = bvq.QuboProblem([1.0, -1.0], {(0, 1): 6.0}, offset=0.5)
    best_bits, best_energy, _ = bvq.brute_force_sample(q, top_k=4)[0]
    assert (best_bits, best_energy) == ("01", -0.5)
    rows = bvq.simulated_annealing_sample(q, bvq.AnnealSchedule(num_sweeps=200), seed=3)
    assert rows[0][:2] == ("01", -0.5)
    assert sum(r[2] for r in rows) == 20


def test_fm_prediction_and_qubo():
    model = bvq.FmModel(0.5, np.array([1.0, -1.0]), np.array([[2.0], [3.0]]))
    assert model.predict("11") == pytest.approx(6.5)
    q = model.to_qubo()
    assert q.quadratic == {(0, 1): pytest.approx(6.0)}
    for bits in ["00", "01", "10", "11"]:
        assert q.energy(bits) == pytest.approx(model.predict(bits))


def test_fm_training_on_planted_data():
    rng = np.random.default_rng(0)
    planted = bvq.FmModel(0.1, rng.uniform(-1, 1, 6), rng.uniform(-1, 1, (6, 2)))
    xs = ["".join(str(b) for b in rng.integers(0, 2, 6)) for _ in range(200)]
    ys = [planted.predict(x) for x in xs]
    model, report = bvq.fm_train(xs, ys, rank=2, epochs=100, seed=1)
    assert model.n == 6 and model.k == 2
    assert report["test_r2"] > 0.9


def test_numerics_and_limits():
    assert bvq.bernoulli_kl(0.75) == pytest.approx(0.13081, abs=1e-4)
    y = bvq.gumbel_softmax([math.log(0.5)] * 2, 1.0, [1.0, 0.0])
    assert y[0] == pytest.approx(math.e / (math.e + 1))
    assert not bvq.check_hardware_feasibility(500, 180).fits_hardware
    assert bvq.check_hardware_feasibility(64, 64).fits_hardware
    flips = bvq.bit_flip_augment("010", 3, seed=1)
    assert sorted(str(f) for f in flips) == ["000", "011", "110"]
    with pytest.raises(bvq.InvalidArgument):
        bvq.bit_flip_augment("010", 4)


def test_objectives():
    planes = bvq.half_plane_patterns(8)
    assert len(planes) == 16
    target = planes[3]
    assert bvq.target_overlap(target, target) == 1.0
    assert bvq.target_overlap(target, 1.0 - target) == 0.0
    assert bvq.product_efficiency(np.zeros((8, 8))) == pytest.approx(math.exp(-12.5))


def test_pipeline_from_config(tmp_path):
    summary = bvq.run_pipeline(DATA / "golden.ini", out=tmp_path)
    history = summary["history"]
    assert len(history) == 5
    assert all(b["running_max_fom"] >= a["running_max_fom"] for a, b in zip(history, history[1:]))
    assert (tmp_path / "convergence.csv").read_text() == (DATA / "golden_convergence.csv").read_text()
    model = bvq.BvaeModel.load(tmp_path / "bvae.txt")
    pattern = model.decode("0" * model.latent_bits)
    assert pattern.shape == (6, 6)
    assert str(model.encode(pattern)) == str(model.encode(pattern))
    with pytest.raises(bvq.MissingInputError):
        bvq.run_pipeline(tmp_path / "missing.ini")
