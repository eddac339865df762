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

#include "posmap/conic.hpp"
#include "posmap/errors.hpp"
#include "test_util.hpp"

using namespace posmap;
using namespace posmap::conic;

namespace {

SparseHermitian denseToSparse(const ComplexMatrix& m) {
    SparseHermitian s;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (m(r, c) != Complex(0.0)) s.push_back({r, c, m(r, c)});
    return s;
}

ConeBlock nonneg(int size, const std::string& label) {
    ConeBlock b;
    b.kind = ConeKind::NonNegative;
    b.size = size;
    b.label = label;
    b.constant = ComplexMatrix::Zero(size, size);
    return b;
}

} // namespace

TEST_CASE("largest eigenvalue as an LMI") {
    std::mt19937_64 rng(1);
    for (int n : {2, 5, 9}) {
        HermitianOperator h = posmap::testing::randomHermitian(n, rng);
        ConicProblem p;
        p.numVariables = 1;
        p.objective = RealVector::Ones(1);
        ConeBlock b;
        b.size = n;
        b.label = "tI-H";
        b.constant = -h.matrix();
        b.coefficients.push_back(denseToSparse(ComplexMatrix::Identity(n, n)));
        p.cones.push_back(b);
        SolveResult r = solve(p);
        CHECK((r.status == SolveStatus::Optimal));
        CHECK(r.value == doctest::Approx(eigH(h).values(n - 1)).epsilon(1e-7));
        CHECK(r.lowerBound <= r.value + 1e-7);
    }
}

TEST_CASE("complex coefficients: unit disk") {
    // [[1, x + iy], [x − iy, 1]] ⪰ 0  ⇔  x² + y² ≤ 1; minimize −x − 2y.
    ConicProblem p;
    p.numVariables = 2;
    p.objective = RealVector(2);
    p.objective << -1.0, -2.0;
    ConeBlock b;
    b.size = 2;
    b.label = "disk";
    b.constant = ComplexMatrix::Identity(2, 2);
    b.coefficients.push_back({{0, 1, Complex(1, 0)}, {1, 0, Complex(1, 0)}});
    b.coefficients.push_back({{0, 1, Complex(0, 1)}, {1, 0, Complex(0, -1)}});
    p.cones.push_back(b);
    SolveResult r = solve(p);
    CHECK((r.status == SolveStatus::Optimal));
    CHECK(r.value == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-7));
    CHECK(r.y(0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-5));
    CHECK(r.y(1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-5));
}

TEST_CASE("linear program through nonnegative blocks") {
    ConicProblem p;
    p.numVariables = 2;
    p.objective = RealVector::Ones(2);
    ConeBlock b = nonneg(2, "lb");
    b.constant(0, 0) = -1.0;
    b.constant(1, 1) = -2.0;
    b.coefficients.push_back({{0, 0, Complex(1)}});
    b.coefficients.push_back({{1, 1, Complex(1)}});
    p.cones.push_back(b);
    SolveResult r = solve(p);
    CHECK((r.status == SolveStatus::Optimal));
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("equality constraints") {
    // minimize y0 subject to y0 + y1 = 1, y1 ≤ 0.5.
    ConicProblem p;
    p.numVariables = 2;
    p.objective = RealVector::Zero(2);
    p.objective(0) = 1.0;
    LinearEquality eq;
    eq.coefficients = RealVector::Ones(2);
    eq.rhs = 1.0;
    p.equalities.push_back(eq);
    ConeBlock b = nonneg(1, "ub");
    b.constant(0, 0) = 0.5;
    b.coefficients.push_back({});
    b.coefficients.push_back({{0, 0, Complex(-1)}});
    p.cones.push_back(b);
    SolveResult r = solve(p);
    CHECK((r.status == SolveStatus::Optimal));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.y.sum() == doctest::Approx(1.0).epsilon(1e-9));

    ConicProblem bad = p;
    LinearEquality eq2;
    eq2.coefficients = RealVector::Ones(2);
    eq2.rhs = 2.0;
    bad.equalities.push_back(eq2);
    CHECK((solve(bad).status == SolveStatus::Infeasible));
}

TEST_CASE("infeasible cone is not reported optimal") {
    // y ≥ 1 and −y ≥ 0.
    ConicProblem p;
    p.numVariables = 1;
    p.objective = RealVector::Ones(1);
    ConeBlock b = nonneg(2, "contradiction");
    b.constant(0, 0) = -1.0;
    b.coefficients.push_back({{0, 0, Complex(1)}, {1, 1, Complex(-1)}});
    p.cones.push_back(b);
    SolveResult r = solve(p);
    CHECK((r.status != SolveStatus::Optimal));
}

TEST_CASE("validation") {
    ConicProblem p;
    p.numVariables = 1;
    p.objective = RealVector::Ones(2);
    CHECK_THROWS_AS(p.validate(), DimensionError);

    ConicProblem q;
    q.numVariables = 1;
    q.objective = RealVector::Ones(1);
    ConeBlock b = nonneg(2, "offdiag");
    b.coefficients.push_back({{0, 1, Complex(1)}, {1, 0, Complex(1)}});
    q.cones.push_back(b);
    CHECK_THROWS_AS(q.validate(), InputError);

    ConicProblem u;
    u.numVariables = 1;
    u.objective = RealVector::Ones(1);
    CHECK_THROWS_AS(solve(u), InputError);

    SolverSettings s;
    s.maxIterations = 0;
    CHECK_THROWS_AS(solve(q, s), InputError);
}
