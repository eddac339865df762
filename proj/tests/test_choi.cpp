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

#include "posmap/choi.hpp"
#include "posmap/errors.hpp"
#include "posmap/optimizer.hpp"
#include "test_util.hpp"

using namespace posmap;
using posmap::testing::randomComplex;
using posmap::testing::randomHermitian;
using posmap::testing::randomState;
using posmap::testing::randomUnit;

namespace {

KrausSet randomKraus(int dIn, int dOut, int count, std::mt19937_64& rng) {
    KrausSet k;
    for (int i = 0; i < count; ++i) k.ops.push_back(randomComplex(dOut, dIn, rng));
    return k;
}

// TP needs the last diagonal slot of every block kept.
ChoiMask maskKeepingTpSlots(int dIn, int dOut, double density, std::uint64_t seed) {
    ChoiMask base = builtinMask("random", dIn, dOut, density, seed);
    const int n = dIn * dOut;
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(n * n));
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            bool dep = p % dOut == dOut - 1 && q % dOut == dOut - 1;
            keep[static_cast<std::size_t>(p * n + q)] = (base.keeps(p, q) || dep) ? 1 : 0;
        }
    return ChoiMask(dIn, dOut, keep);
}

double lossOf(const ChoiParams& p, const ComplexMatrix& g) { return realInner(g.adjoint(), buildChoi(p).matrix()); }

} // namespace

TEST_CASE("buildChoi fixed points") {
    ChoiParams p;
    p.dIn = 2;
    p.dOut = 2;
    p.X = RealMatrix::Zero(4, 4);
    p.flags.tp = true;
    ChoiMatrix c = buildChoi(p);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            CHECK(c.matrix()(i * 2, k * 2) == Complex(0.0));
            CHECK(c.matrix()(i * 2 + 1, k * 2 + 1) == Complex(i == k ? 1.0 : 0.0));
        }
    CHECK(c.tpResidual() == 0.0);

    ChoiParams q;
    q.dIn = 2;
    q.dOut = 3;
    q.X = RealMatrix::Identity(6, 6);
    CHECK(buildChoi(q).matrix() == ComplexMatrix::Identity(6, 6));
}

TEST_CASE("buildChoi entry formula") {
    std::mt19937_64 rng(1);
    ChoiParams p = ChoiParams::random(2, 3, {}, std::nullopt, rng);
    ChoiMatrix c = buildChoi(p);
    for (int r = 0; r < 6; ++r)
        for (int s = 0; s < 6; ++s) {
            CHECK(c.matrix()(r, s).real() == 0.5 * (p.X(r, s) + p.X(s, r)));
            CHECK(c.matrix()(r, s).imag() == 0.5 * (p.X(r, s) - p.X(s, r)));
        }
}

TEST_CASE("buildChoi flags over random draws") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        int d = 2 + t % 3, dOut = 2 + (t / 3) % 3;
        ChoiParams tp = ChoiParams::random(d, dOut, {true, false}, std::nullopt, rng);
        ChoiMatrix c = buildChoi(tp);
        CHECK((c.matrix() - c.matrix().adjoint()).norm() == 0.0);
        CHECK(c.tpResidual() <= 1e-14);

        ChoiParams re = ChoiParams::random(d, dOut, {true, true}, std::nullopt, rng);
        ChoiMatrix cr = buildChoi(re);
        CHECK(cr.maxAbsImag() == 0.0);
        CHECK(cr.tpResidual() <= 1e-14);
    }
}

TEST_CASE("ChoiParams random validation") {
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(ChoiParams::random(2, 2, {}, std::nullopt, rng, 0.0), InputError);
    CHECK_THROWS_AS(ChoiParams::random(0, 2, {}, std::nullopt, rng), DimensionError);
    std::mt19937_64 a(9), b(9);
    CHECK(ChoiParams::random(3, 3, {}, std::nullopt, a).X == ChoiParams::random(3, 3, {}, std::nullopt, b).X);
}

TEST_CASE("masks") {
    ChoiMask fam = builtinMask("family9");
    CHECK(fam.keptCount() == 13);
    FamilyParams fp{0.3, 0.5, 0.7, Complex(0.2, 0.1), Complex(-0.4, 0.3)};
    ComplexMatrix f = familyChoi(fp).matrix();
    for (int r = 0; r < 9; ++r)
        for (int s = 0; s < 9; ++s)
            if (!fam.keeps(r, s)) CHECK(f(r, s) == Complex(0.0));
            else CHECK(f(r, s) != Complex(0.0));

    std::mt19937_64 rng(4);
    ChoiParams p = ChoiParams::random(3, 3, {}, std::nullopt, rng);
    ChoiParams full = p;
    full.mask = ChoiMask::full(3, 3);
    CHECK(buildChoi(p).matrix() == buildChoi(full).matrix());

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ChoiMask m = builtinMask("random", 3, 3, 0.3, seed);
        CHECK(m.asymmetricPairs().empty());
        ChoiParams mp = ChoiParams::random(3, 3, {}, m, rng);
        ComplexMatrix c = buildChoi(mp).matrix();
        for (int r = 0; r < 9; ++r)
            for (int s = 0; s < 9; ++s)
                if (!m.keeps(r, s)) CHECK(c(r, s) == Complex(0.0));
    }

    std::vector<std::uint8_t> keep(16, 1);
    keep[1] = 0; // (0,1) dropped but (1,0) kept
    ChoiMask bad(2, 2, keep);
    REQUIRE(bad.asymmetricPairs().size() == 1);
    CHECK(bad.asymmetricPairs()[0] == std::make_pair(0, 1));
    CHECK_THROWS_AS(bad.validate(), InputError);
    ChoiParams bp = ChoiParams::random(2, 2, {}, std::nullopt, rng);
    bp.mask = bad;
    CHECK_THROWS_AS(buildChoi(bp), InputError);
    CHECK_THROWS_AS(builtinMask("nope"), InputError);
}

TEST_CASE("TP with mask keeps the trace condition") {
    std::mt19937_64 rng(5);
    ChoiMask m = maskKeepingTpSlots(3, 3, 0.3, 7);
    ChoiParams p = ChoiParams::random(3, 3, {true, false}, m, rng);
    ChoiMatrix c = buildChoi(p);
    CHECK(c.tpResidual() <= 1e-14);

    ChoiParams q = p;
    q.mask = builtinMask("family9");
    CHECK_THROWS_AS(q.validate(), InputError);
}

TEST_CASE("choiParamGradient matches finite differences") {
    std::mt19937_64 rng(6);
    const ChoiFlags flagSets[] = {{false, false}, {true, false}, {false, true}, {true, true}};
    for (ChoiFlags flags : flagSets) {
        for (int useMask = 0; useMask < 2; ++useMask) {
            std::optional<ChoiMask> mask;
            if (useMask) mask = maskKeepingTpSlots(2, 3, 0.5, 11);
            ChoiParams p = ChoiParams::random(2, 3, flags, mask, rng);
            ComplexMatrix g = randomHermitian(6, rng).matrix();
            RealMatrix an = choiParamGradient(p, g);
            RealMatrix frozen = frozenSlots(p);
            for (int r = 0; r < 6; ++r)
                for (int s = 0; s < 6; ++s) {
                    if (frozen(r, s) != 0.0) {
                        CHECK(an(r, s) == 0.0);
                        continue;
                    }
                    const double h = 1e-6;
                    ChoiParams plus = p, minus = p;
                    plus.X(r, s) += h;
                    minus.X(r, s) -= h;
                    double fd = (lossOf(plus, g) - lossOf(minus, g)) / (2 * h);
                    CHECK(an(r, s) == doctest::Approx(fd).epsilon(1e-6));
                }
        }
    }
}

TEST_CASE("applyMap") {
    std::mt19937_64 rng(7);
    for (int d = 2; d <= 4; ++d) {
        HermitianOperator rho = randomState(d, rng);
        CHECK((applyMap(ChoiMatrix::identityMap(d), rho).matrix() - rho.matrix()).norm() < 1e-14);
        CHECK((applyMap(ChoiMatrix::transposition(d), rho).matrix() - rho.matrix().transpose()).norm() < 1e-14);
    }

    ChoiMatrix c1(2, 3, randomHermitian(6, rng)), c2(2, 3, randomHermitian(6, rng));
    ComplexMatrix x = randomComplex(2, 2, rng), y = randomComplex(2, 2, rng);
    ComplexMatrix lhs = applyMap(c1, ComplexMatrix(2.0 * x + y));
    CHECK((lhs - 2.0 * applyMap(c1, x) - applyMap(c1, y)).norm() < 1e-12);
    ChoiMatrix sum(2, 3, c1.op() + c2.op());
    CHECK((applyMap(sum, x) - applyMap(c1, x) - applyMap(c2, x)).norm() < 1e-12);

    ChoiParams tp = ChoiParams::random(3, 2, {true, false}, std::nullopt, rng);
    HermitianOperator rho = randomState(3, rng);
    CHECK(applyMap(buildChoi(tp), rho).trace() == doctest::Approx(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(applyMap(c1, ComplexMatrix(ComplexMatrix::Zero(3, 3))), DimensionError);
}

TEST_CASE("choiFromKraus") {
    KrausSet id;
    id.ops.push_back(ComplexMatrix::Identity(3, 3));
    ComplexVector psi = maxEntVector(3);
    CHECK((choiFromKraus(id).matrix() - psi * psi.adjoint()).norm() == 0.0);

    ComplexMatrix I = ComplexMatrix::Identity(2, 2), X(2, 2), Y(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    KrausSet pauli;
    for (const ComplexMatrix& m : {I, X, Y, Z}) pauli.ops.push_back(m / std::sqrt(2.0));
    CHECK((choiFromKraus(pauli).matrix() - ComplexMatrix::Identity(4, 4)).norm() < 1e-14);
    CHECK(choiFromKraus(pauli).op().trace() == doctest::Approx(4.0));

    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        KrausSet k = randomKraus(3, 2, 3, rng);
        ChoiMatrix c = choiFromKraus(k);
        CHECK(minEigenvalue(c.matrix()) >= -1e-12);
        ComplexMatrix rho = randomState(3, rng).matrix();
        CHECK((applyMap(c, rho) - k.apply(rho)).norm() < 1e-12);
    }

    KrausSet mixed;
    mixed.ops.push_back(ComplexMatrix::Identity(2, 2));
    mixed.ops.push_back(ComplexMatrix::Identity(3, 3));
    CHECK_THROWS_AS(choiFromKraus(mixed), InputError);
}

TEST_CASE("familyChoi") {
    FamilyParams diag{1.0 / 3, 1.0 / 3, 1.0 / 3, Complex(0), Complex(0)};
    ChoiMatrix c = familyChoi(diag);
    CHECK(c.matrix().isDiagonal());
    CHECK(c.tpResidual() < 1e-15);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        FamilyParams fp{u(rng), u(rng), u(rng), Complex(u(rng) - 0.5, u(rng) - 0.5),
                        Complex(u(rng) - 0.5, u(rng) - 0.5)};
        ChoiMatrix f = familyChoi(fp);
        ComplexMatrix rho = randomState(3, rng).matrix();
        CHECK((applyMap(f, rho) - familyAction(fp, rho)).norm() < 1e-12);
        ComplexMatrix red = partialTrace(f.matrix(), f.dims(), {1});
        CHECK((red - (fp.a + fp.b + fp.c) * ComplexMatrix::Identity(3, 3)).norm() < 1e-14);
    }

    FamilyParams neg{-0.1, 0.5, 0.6, Complex(0), Complex(0)};
    CHECK_THROWS_AS(familyChoi(neg), InputError);
}

TEST_CASE("composeChoi") {
    ComplexVector psi = maxEntVector(3);
    ChoiMatrix id = ChoiMatrix::identityMap(3);
    CHECK((composeChoi(id, id).matrix() - psi * psi.adjoint()).norm() == 0.0);
    ChoiMatrix t = ChoiMatrix::transposition(2);
    ComplexVector psi2 = maxEntVector(2);
    CHECK((composeChoi(t, t).matrix() - psi2 * psi2.adjoint()).norm() == 0.0);

    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        KrausSet k1 = randomKraus(4, 2, 2, rng), k2 = randomKraus(2, 4, 3, rng);
        ChoiMatrix c1 = choiFromKraus(k1), c2 = choiFromKraus(k2);
        ChoiMatrix c12 = composeChoi(c1, c2);
        ComplexMatrix rho = randomState(2, rng).matrix();
        CHECK((applyMap(c12, rho) - applyMap(c1, applyMap(c2, rho))).norm() < 1e-11);

        KrausSet both;
        for (const auto& a : k1.ops)
            for (const auto& b : k2.ops) both.ops.push_back(a * b);
        CHECK((choiFromKraus(both).matrix() - c12.matrix()).norm() < 1e-11);
    }

    CHECK_THROWS_AS(composeChoi(ChoiMatrix::identityMap(2), ChoiMatrix::identityMap(3)), InputError);
}

TEST_CASE("composeChoiAdjoint is the adjoint") {
    std::mt19937_64 rng(11);
    ChoiMatrix c1(4, 2, randomHermitian(8, rng)), c2(2, 4, randomHermitian(8, rng));
    ComplexMatrix g = randomHermitian(4, rng).matrix();
    auto [g1, g2] = composeChoiAdjoint(g, c1, c2);
    HermitianOperator e1 = randomHermitian(8, rng), e2 = randomHermitian(8, rng);
    const double h = 1e-6;
    auto loss = [&](const HermitianOperator& a, const HermitianOperator& b) {
        return realInner(g.adjoint(), composeChoi(ChoiMatrix(4, 2, a), ChoiMatrix(2, 4, b)).matrix());
    };
    double fd1 = (loss(c1.op() + e1 * h, c2.op()) - loss(c1.op() - e1 * h, c2.op())) / (2 * h);
    double fd2 = (loss(c1.op(), c2.op() + e2 * h) - loss(c1.op(), c2.op() - e2 * h)) / (2 * h);
    CHECK(realInner(g1.adjoint(), e1.matrix()) == doctest::Approx(fd1).epsilon(1e-7));
    CHECK(realInner(g2.adjoint(), e2.matrix()) == doctest::Approx(fd2).epsilon(1e-7));
}

TEST_CASE("precomposeTransposition") {
    std::mt19937_64 rng(12);
    ChoiMatrix c(2, 3, randomHermitian(6, rng));
    ChoiMatrix ct = precomposeTransposition(c);
    ComplexMatrix rho = randomState(2, rng).matrix();
    CHECK((applyMap(ct, rho) - applyMap(c, ComplexMatrix(rho.transpose()))).norm() < 1e-13);
}

TEST_CASE("blockPositivityProbe") {
    ChoiMatrix id(2, 2, HermitianOperator::identity(4));
    CHECK(blockPositivityProbe(id, 20, 5).minValue == doctest::Approx(1.0));

    ChoiMatrix sw = ChoiMatrix::transposition(2);
    ProbeResult r = blockPositivityProbe(sw, 50, 20);
    CHECK(std::abs(r.minValue) < 1e-10);
    CHECK(r.minValue >= -1e-12);

    std::mt19937_64 rng(13);
    ComplexVector v = randomUnit(3, rng), w = randomUnit(2, rng);
    ComplexVector vw = kron(v, w);
    ChoiMatrix planted(3, 2, HermitianOperator(ComplexMatrix(ComplexMatrix::Identity(6, 6) - 2.0 * vw * vw.adjoint())));
    CHECK(blockPositivityProbe(planted, 200, 20).minValue == doctest::Approx(-1.0).epsilon(1e-8));

    CHECK_THROWS_AS(blockPositivityProbe(id, 0, 1), InputError);
}

TEST_CASE("ChoiMatrix flag checks") {
    std::mt19937_64 rng(14);
    CHECK_THROWS_AS(ChoiMatrix(2, 2, randomHermitian(4, rng), {true, false}), InputError);
    CHECK_THROWS_AS(ChoiMatrix(2, 2, randomHermitian(4, rng), {false, true}), InputError);
    CHECK_THROWS_AS(ChoiMatrix(2, 3, randomHermitian(4, rng)), DimensionError);
}
