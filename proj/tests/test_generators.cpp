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

#include "posmap/certificates.hpp"
#include "posmap/errors.hpp"
#include "posmap/generators.hpp"
#include "test_util.hpp"

using namespace posmap;
using posmap::testing::randomComplex;
using posmap::testing::randomHermitian;
using posmap::testing::randomState;

TEST_CASE("krausFromDilation") {
    KrausSet k0 = krausFromDilation(DilationParams::zero(3, 2), 3);
    REQUIRE(k0.ops.size() == 2);
    CHECK((k0.ops[0] - ComplexMatrix::Identity(3, 3)).norm() == 0.0);
    CHECK(k0.ops[1].norm() == 0.0);

    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const int d = 2 + t % 3, a = 1 + t % 3;
        DilationParams dp = DilationParams::random(d, a, rng);
        KrausSet k = krausFromDilation(dp, d);
        CHECK(k.completenessResidual() <= 1e-10);

        ComplexMatrix u = dilationUnitary(dp);
        ComplexMatrix rho = randomState(d, rng).matrix();
        ComplexMatrix anc0 = ComplexMatrix::Zero(a, a);
        anc0(0, 0) = 1.0;
        ComplexMatrix big = u * kron(rho, anc0) * u.adjoint();
        ComplexMatrix direct = partialTrace(big, SubsystemDims{d, a}, {1});
        CHECK((direct - k.apply(rho)).norm() < 1e-11);
    }
    CHECK_THROWS_AS(krausFromDilation(DilationParams::zero(3, 2), 2), InputError);
}

TEST_CASE("decomposableChoi") {
    ComplexVector psi = maxEntVector(3);
    DecomposableSpec id = DecomposableSpec::withWeight(1.0, DilationParams::zero(3, 3), DilationParams::zero(3, 3));
    CHECK((decomposableChoi(id, 3).matrix() - psi * psi.adjoint()).norm() < 1e-12);
    DecomposableSpec tr = DecomposableSpec::withWeight(0.0, DilationParams::zero(2, 2), DilationParams::zero(2, 2));
    CHECK((decomposableChoi(tr, 2).matrix() - ChoiMatrix::transposition(2).matrix()).norm() < 1e-12);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 6; ++t) {
        DecomposableSpec s = DecomposableSpec::withWeight(u(rng), DilationParams::random(3, 3, rng),
                                                          DilationParams::random(3, 3, rng));
        ChoiMatrix c = decomposableChoi(s, 3);
        CHECK(c.tpResidual() <= 1e-10);
        CHECK(zeta1(c).value >= -1e-7);

        ChoiMatrix c1 = choiFromKraus(krausFromDilation(s.dilation1, 3));
        ChoiMatrix c2 = precomposeTransposition(choiFromKraus(krausFromDilation(s.dilation2, 3)));
        const double p = s.p();
        CHECK(minEigenvalue(c.matrix()) >=
              p * minEigenvalue(c1.matrix()) + (1 - p) * minEigenvalue(c2.matrix()) - 1e-12);
    }
    CHECK_THROWS_AS(DecomposableSpec::withWeight(1.5, {}, {}), InputError);
}

TEST_CASE("dilationGradient matches finite differences") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 4; ++t) {
        const int d = 2 + t % 2, a = 2;
        DilationParams dp = DilationParams::random(d, a, rng, 0.5);
        ComplexMatrix g = randomHermitian(d * d, rng).matrix();
        ComplexMatrix grad = dilationGradient(dp, d, g);
        ComplexMatrix e = randomComplex(d * a, d * a, rng);
        auto loss = [&](const ComplexMatrix& A) {
            DilationParams q{A, a};
            return realInner(g.adjoint(), choiFromKraus(krausFromDilation(q, d)).matrix());
        };
        const double h = 1e-6;
        double fd = (loss(dp.A + h * e) - loss(dp.A - h * e)) / (2 * h);
        CHECK(realInner(grad, e) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("trainNonCPDecomposable") {
    DecomposableGenConfig gen;
    gen.initialP = 1e-6;
    TrainConfig tc;
    tc.maxEpochs = 50;
    tc.seed = 4;
    DecomposableRun fast = trainNonCPDecomposable(gen, tc);
    CHECK((fast.record.outcome == RunOutcome::Success));
    CHECK(fast.record.successEpoch == 1);

    DecomposableGenConfig plain;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        tc.seed = seed;
        tc.maxEpochs = 500;
        DecomposableRun r = trainNonCPDecomposable(plain, tc);
        REQUIRE((r.record.outcome == RunOutcome::Success));
        ChoiMatrix c = r.record.finalChoi;
        CHECK(minEigenvalue(c.matrix()) <= 0.0);
        CHECK(c.tpResidual() <= 1e-10);
        CHECK(zeta1(c).value >= -1e-7);
        CHECK(krausFromDilation(r.spec.dilation1, 3).completenessResidual() <= 1e-10);
        CHECK(krausFromDilation(r.spec.dilation2, 3).completenessResidual() <= 1e-10);
        CHECK((decomposableChoi(r.spec, 3).matrix() - c.matrix()).norm() < 1e-12);

        DecomposableRun again = trainNonCPDecomposable(plain, tc);
        CHECK(again.record.successEpoch == r.record.successEpoch);
    }
}

TEST_CASE("PPT maps") {
    PptMapSpec ent{maxEntVector(2), 2, 2};
    CHECK(pptPenalty(ent) == doctest::Approx(1.0).epsilon(1e-12));
    PptMapSpec id{ComplexMatrix::Identity(4, 4), 2, 2};
    CHECK(pptPenalty(id) == 0.0);
    CHECK((pptChoi(id).matrix() - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 4; ++t) {
        PptMapSpec s = PptMapSpec::random(2, 3, rng);
        CHECK(minEigenvalue(pptChoi(s).matrix()) >= -1e-12);
        ComplexMatrix grad = pptPenaltyGradient(s);
        ComplexMatrix e = randomComplex(6, 6, rng);
        const double h = 1e-7;
        PptMapSpec plus = s, minus = s;
        plus.A += h * e;
        minus.A -= h * e;
        double fd = (pptPenalty(plus) - pptPenalty(minus)) / (2 * h);
        CHECK(realInner(grad, e) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("compositions with a PPT map") {
    // Completely depolarizing T₂ followed by the (positive) transposition.
    ChoiMatrix dep(4, 3, HermitianOperator(ComplexMatrix(ComplexMatrix::Identity(12, 12) / 3.0)));
    ChoiMatrix c = composeChoi(ChoiMatrix::transposition(3), dep);
    CHECK(zeta1(c).value >= -1e-7);

    std::mt19937_64 rng(6);
    PptMapSpec t2 = PptMapSpec::random(2, 4, rng);
    KrausSet k1;
    for (int i = 0; i < 2; ++i) k1.ops.push_back(randomComplex(3, 4, rng));
    ChoiMatrix c1 = choiFromKraus(k1);
    ChoiMatrix c2 = pptChoi(t2);
    KrausSet k2;
    for (int r = 0; r < t2.A.cols(); ++r) {
        ComplexMatrix op(4, 2);
        for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 4; ++a) op(a, i) = t2.A(i * 4 + a, r);
        k2.ops.push_back(op);
    }
    CHECK((choiFromKraus(k2).matrix() - c2.matrix()).norm() < 1e-11);
    KrausSet both;
    for (const auto& a : k1.ops)
        for (const auto& b : k2.ops) both.ops.push_back(a * b);
    CHECK((choiFromKraus(both).matrix() - composeChoi(c1, c2).matrix()).norm() < 1e-11);
}

TEST_CASE("pptSquareRun bookkeeping") {
    PptSquareConfig cfg;
    cfg.repairEpochs = 4;
    TrainConfig tc;
    tc.maxEpochs = 4;
    tc.seed = 7;
    LossConfig lc;
    PptSquareResult r = pptSquareRun(cfg, tc, lc);
    CHECK(!r.record.rows.empty());
    CHECK(r.record.rows.size() <= 8);
    CHECK(r.t1.dIn() == 2);
    CHECK(r.t1.dOut() == 4);
    CHECK(r.t2.dIn() == 4);
    CHECK(r.t2.dOut() == 2);
    CHECK(r.compositionZeta1 == r.record.rows.back().zeta1);
    CHECK(r.violation == (r.penaltiesMet && r.compositionZeta1 < -tc.solver.certTol));
    CHECK(r.pptPenaltyValue >= 0.0);
    CHECK(minEigenvalue(r.t2.matrix()) >= -1e-12);

    PptSquareResult again = pptSquareRun(cfg, tc, lc);
    REQUIRE(again.record.rows.size() == r.record.rows.size());
    for (std::size_t i = 0; i < r.record.rows.size(); ++i) CHECK(again.record.rows[i].loss == r.record.rows[i].loss);
}
