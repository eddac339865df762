// Copyright 2026 The posmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "posmap/errors.hpp"
#include "posmap/optimizer.hpp"
#include "test_util.hpp"

using namespace posmap;
using posmap::testing::randomHermitian;

TEST_CASE("hinge arithmetic") {
    LossConfig cfg;
    CHECK(mainHinge(-0.1, 0.02, cfg) == 0.0);
    CHECK(mainHinge(0.0, -0.01, cfg) == doctest::Approx(0.07));
    CHECK(mainHinge(-0.05, 0.0, cfg) == 0.0);
    CHECK(relu(0.0) == 0.0);
    CHECK(relu(-1.0) == 0.0);
    CHECK(relu(2.0) == 2.0);
    CHECK(boundHinge(-0.1, 0.02, -0.5, cfg) == 0.0);
    CHECK(boundHinge(-0.1, 0.0, 0.0, cfg) == doctest::Approx(2.0 * 0.01 + 0.01));

    LossConfig bad;
    bad.k = 1;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = LossConfig{};
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    CHECK((lossModeFromString("bound") == LossMode::Bound));
    CHECK_THROWS_AS(lossModeFromString("nope"), InputError);
}

TEST_CASE("lossMain on the identity map") {
    LossValue v = lossMain(ChoiMatrix::identityMap(3), LossConfig{});
    CHECK(std::abs(v.zeta1) < 1e-7);
    CHECK(std::abs(v.zetaK) < 1e-7);
    CHECK(v.loss == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(std::isnan(v.xi));
}

TEST_CASE("xi values") {
    XiResult t2 = xi(ChoiMatrix::transposition(2));
    CHECK(t2.traceMap == doctest::Approx(2.0));
    CHECK(t2.minReal == doctest::Approx(-1.0));
    CHECK(t2.value == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(std::abs(xi(ChoiMatrix::identityMap(3)).value) < 1e-9);
    CHECK(std::abs(xi(ChoiMatrix::transposition(3)).value) < 1e-9);

    const double r = std::sqrt(2.0) / 2.0;
    XiResult fam = xi(familyChoi({1.0, 0.0, 0.0, Complex(r), Complex(r)}));
    CHECK(fam.traceMap == doctest::Approx(3.0 + std::sqrt(2.0)));
    CHECK(fam.minReal == doctest::Approx(-r));
    CHECK(fam.value == doctest::Approx(3.0 - 2.5 * std::sqrt(2.0)).epsilon(1e-9));

    CHECK_THROWS_AS(xi(ChoiMatrix(2, 3, HermitianOperator::identity(6))), InputError);
    CHECK_THROWS_AS(lossBound(ChoiMatrix(2, 3, HermitianOperator::identity(6)), LossConfig{}), InputError);
}

TEST_CASE("xi gradient matches finite differences") {
    std::mt19937_64 rng(1);
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
        ChoiMatrix c(3, 3, randomHermitian(9, rng));
        XiResult x = xi(c);
        if (x.degenerate) continue;
        for (int dir = 0; dir < 3; ++dir) {
            HermitianOperator e = randomHermitian(9, rng);
            const double h = 1e-6;
            double fd = (xi(ChoiMatrix(3, 3, c.op() + e * h), false).value -
                         xi(ChoiMatrix(3, 3, c.op() - e * h), false).value) / (2 * h);
            CHECK(realInner(x.gradient, e.matrix()) == doctest::Approx(fd).epsilon(1e-5));
            ++checked;
        }
    }
    CHECK(checked >= 30);
}

TEST_CASE("zeta1 Danskin derivative") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 4; ++t) {
        ChoiMatrix c(2, 3, randomHermitian(6, rng));
        Certificate z = zeta1(c);
        HermitianOperator e = randomHermitian(6, rng);
        const double h = 1e-5;
        double fd = (zeta1(ChoiMatrix(2, 3, c.op() + e * h)).value - zeta1(ChoiMatrix(2, 3, c.op() - e * h)).value) /
                    (2 * h);
        CHECK(realInner(z.witness.matrix(), e.matrix()) == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("loss gradient assembly") {
    std::mt19937_64 rng(3);
    ChoiMatrix c(3, 3, randomHermitian(9, rng));
    LossConfig cfg;
    cfg.epsilon = 100.0; // ε hinge surely active
    LossValue v = lossBound(c, cfg);
    ComplexMatrix g = lossGradientChoi(v, cfg);
    ComplexMatrix expect = v.cert1.witness.matrix();
    if (cfg.delta - v.zetaK > 0.0) expect -= cfg.gamma * v.certK.witness.matrix();
    if (cfg.nu + v.xi > 0.0) expect += cfg.omega * v.xiGradient;
    CHECK((g - expect).norm() == 0.0);

    LossValue inactive;
    inactive.zeta1 = -1.0;
    inactive.zetaK = 1.0;
    inactive.cert1.witness = HermitianOperator::identity(4);
    inactive.certK.witness = HermitianOperator::identity(4);
    CHECK(lossGradientChoi(inactive, LossConfig{}).norm() == 0.0);
}

TEST_CASE("Adam closed form") {
    TrainConfig cfg;
    RealMatrix x = RealMatrix::Zero(2, 2);
    RealMatrix g(2, 2);
    g << 1.0, -2.0, 0.5, 0.0;
    AdamState st;
    adamStep(x, g, st, cfg);
    // First step: m̂ = g, v̂ = g², so x = −lr·g/(|g| + ε).
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(x(i, j) == doctest::Approx(-cfg.learningRate * g(i, j) / (std::abs(g(i, j)) + cfg.adamEps)));

    // Second step with the same gradient keeps the same direction and size.
    RealMatrix before = x;
    adamStep(x, g, st, cfg);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(x(i, j) - before(i, j) ==
                  doctest::Approx(-cfg.learningRate * g(i, j) / (std::abs(g(i, j)) + cfg.adamEps)));

    RealMatrix frozen = RealMatrix::Zero(2, 2);
    frozen(0, 1) = 1.0;
    RealMatrix y = RealMatrix::Ones(2, 2);
    AdamState sf;
    adamStep(y, g, sf, cfg, &frozen);
    CHECK(y(0, 1) == 1.0);
    CHECK(y(0, 0) < 1.0);
    CHECK_THROWS_AS(adamStep(y, RealMatrix::Zero(3, 3), sf, cfg), DimensionError);
}

TEST_CASE("Adam on ChoiParams keeps the constraints") {
    std::mt19937_64 rng(4);
    ChoiMask mask = builtinMask("random", 2, 2, 0.5, 3);
    std::vector<std::uint8_t> keep;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) keep.push_back((mask.keeps(p, q) || (p % 2 == 1 && q % 2 == 1)) ? 1 : 0);
    ChoiParams p = ChoiParams::random(2, 2, {true, true}, ChoiMask(2, 2, keep), rng);
    AdamState st;
    TrainConfig cfg;
    for (int i = 0; i < 5; ++i) {
        RealMatrix g = posmap::testing::randomComplex(4, 4, rng).real();
        adamStep(p, g, st, cfg);
        ChoiMatrix c = buildChoi(p);
        CHECK(c.tpResidual() <= 1e-14);
        CHECK(c.maxAbsImag() == 0.0);
        for (int r = 0; r < 4; ++r)
            for (int s = 0; s < 4; ++s)
                if (!p.mask->keeps(r, s)) CHECK(p.X(r, s) == 0.0);
    }
}

TEST_CASE("trainLoop bookkeeping and determinism") {
    std::mt19937_64 rng(5);
    ChoiParams init = ChoiParams::random(2, 2, {true, false}, std::nullopt, rng);
    LossConfig lc;
    TrainConfig tc;
    tc.maxEpochs = 15;
    RunRecord a = trainLoop(init, lc, tc);
    RunRecord b = trainLoop(init, lc, tc);
    CHECK((a.outcome == RunOutcome::Exhausted));
    CHECK_FALSE(a.successEpoch.has_value());
    REQUIRE(a.rows.size() == 15);
    REQUIRE(b.rows.size() == 15);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].epoch == static_cast<int>(i) + 1);
        CHECK(a.rows[i].loss == b.rows[i].loss);
        CHECK(a.rows[i].zeta1 == b.rows[i].zeta1);
        CHECK(a.rows[i].zetaK == b.rows[i].zetaK);
        CHECK(a.rows[i].loss == mainHinge(a.rows[i].zeta1, a.rows[i].zetaK, lc));
    }
    CHECK(a.finalChoi.matrix() == b.finalChoi.matrix());
    CHECK(a.finalChoi.tpResidual() <= 1e-14);

    LossConfig bound;
    bound.mode = LossMode::Bound;
    tc.maxEpochs = 3;
    RunRecord rb = trainLoop(init, bound, tc);
    REQUIRE(rb.rows.size() == 3);
    CHECK(std::isfinite(rb.rows[0].xi));

    LossConfig wrong;
    wrong.mode = LossMode::PptSquare;
    CHECK_THROWS_AS(trainLoop(init, wrong, tc), InputError);
}

TEST_CASE("trainLoop reports solver failure") {
    std::mt19937_64 rng(6);
    ChoiParams init = ChoiParams::random(3, 3, {}, std::nullopt, rng);
    TrainConfig tc;
    tc.maxEpochs = 5;
    tc.solver.maxIterations = 1;
    RunRecord r = trainLoop(init, LossConfig{}, tc);
    CHECK((r.outcome == RunOutcome::SolverFailed));
    CHECK(r.rows.empty());
    CHECK_FALSE(r.message.empty());
}
