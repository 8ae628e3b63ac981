#include <pluripot/poly_basis.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace pluripot;

namespace {

MatrixXd random_points(int L, std::uint32_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    MatrixXd p(L, 2);
    for (int i = 0; i < L; ++i) p(i, 0) = u(rng), p(i, 1) = u(rng);
    return p;
}

double cheb_T(int h, double x) {
    // explicit polynomials for small h
    switch (h) {
        case 0: return 1;
        case 1: return x;
        case 2: return 2 * x * x - 1;
        case 3: return 4 * x * x * x - 3 * x;
        default: return std::cos(h * std::acos(x));
    }
}

}  // namespace

TEST(GradedLex, SpecExamples) {
    EXPECT_EQ(graded_lex_index(1, 2).e, (std::vector<int>{0, 0}));
    EXPECT_EQ(graded_lex_index(4, 2).e, (std::vector<int>{0, 2}));
    EXPECT_EQ(graded_lex_index(6, 2).e, (std::vector<int>{2, 0}));
    EXPECT_EQ(graded_lex_index(2, 2).e, (std::vector<int>{0, 1}));
    EXPECT_EQ(graded_lex_index(3, 2).e, (std::vector<int>{1, 0}));
}

TEST(GradedLex, MatchesSortedEnumeration) {
    for (int n : {1, 2, 3}) {
        const int k = 6;
        std::vector<std::vector<int>> all;
        std::vector<int> a(n, 0);
        // brute force over the cube [0,k]^n
        std::function<void(int)> rec = [&](int c) {
            if (c == n) {
                int d = 0;
                for (int v : a) d += v;
                if (d <= k) all.push_back(a);
                return;
            }
            for (int v = 0; v <= k; ++v) {
                a[c] = v;
                rec(c + 1);
            }
        };
        rec(0);
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
            int dx = 0, dy = 0;
            for (int v : x) dx += v;
            for (int v : y) dy += v;
            if (dx != dy) return dx < dy;
            return x < y;
        });
        ASSERT_EQ(all.size(), dimension(n, k));
        for (std::size_t i = 0; i < all.size(); ++i) {
            MultiIndex m = graded_lex_index(i + 1, n);
            EXPECT_EQ(m.e, all[i]);
            EXPECT_EQ(graded_lex_rank(m), i + 1);
        }
    }
}

TEST(GradedLex, StrictTotalOrder) {
    auto idx = multi_indices(2, 8);
    for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_TRUE(idx[i - 1] < idx[i]);
}

TEST(GradedLex, RejectsZeroRank) { EXPECT_THROW(graded_lex_index(0, 2), DomainError); }

TEST(Dimension, Values) {
    EXPECT_EQ(dimension(2, 0), 1u);
    EXPECT_EQ(dimension(2, 2), 6u);
    EXPECT_EQ(dimension(2, 28), 435u);
    EXPECT_EQ(dimension(3, 4), 35u);
}

TEST(Dimension, OverflowIsSizeError) { EXPECT_THROW(dimension(40, 2000000000), SizeError); }

TEST(AffineMapTest, BoundingMap) {
    MatrixXd p(3, 2);
    p << 0, 0, 1, 2, 0.5, 1;
    AffineMap m = bounding_affine_map(p);
    EXPECT_DOUBLE_EQ(m.apply(0, 0.3), 2 * 0.3 - 1);
    EXPECT_DOUBLE_EQ(m.apply(1, 0.3), 0.3 - 1);
    MatrixXd q(2, 2);
    q << -1, -1, 1, 1;
    AffineMap id = bounding_affine_map(q);
    EXPECT_DOUBLE_EQ(id.apply(0, 0.25), 0.25);
    EXPECT_DOUBLE_EQ(id.apply(1, -0.75), -0.75);
    MatrixXd r = random_points(50, 3, -3.0, 5.0);
    AffineMap mr = bounding_affine_map(r);
    for (int i = 0; i < r.rows(); ++i)
        for (int c = 0; c < 2; ++c) EXPECT_LE(std::abs(mr.apply(c, r(i, c))), 1.0 + 1e-15);
}

TEST(AffineMapTest, FlatMesh) {
    MatrixXd p(3, 2);
    p << 0, 1, 1, 1, 2, 1;
    EXPECT_THROW(bounding_affine_map(p), FlatMeshError);
    MatrixXd one(1, 2);
    one << 0, 0;
    EXPECT_THROW(bounding_affine_map(one), FlatMeshError);
}

TEST(EvalBasis, MonomialRow) {
    MatrixXd p(1, 2);
    p << 2, 3;
    MatrixXd V = eval_basis<double>(BasisSpec::monomial(), 1, p);
    EXPECT_DOUBLE_EQ(V(0, 0), 1);
    EXPECT_DOUBLE_EQ(V(0, 1), 3);
    EXPECT_DOUBLE_EQ(V(0, 2), 2);
}

TEST(EvalBasis, ChebyshevExample) {
    MatrixXd p(1, 2);
    p << 0.5, 0.0;
    auto spec = BasisSpec::chebyshev(AffineMap::identity(2));
    for (auto mode : {EvalMode::recurrence, EvalMode::closed_form}) {
        MatrixXd V = eval_basis<double>(spec, 2, p, mode);
        EXPECT_NEAR(V(0, 3), -1.0, 1e-15);  // (0,2)
        EXPECT_NEAR(V(0, 5), -0.5, 1e-15);  // (2,0)
    }
}

TEST(EvalBasis, ChebyshevMatchesExplicitPolynomials) {
    MatrixXd p = random_points(20, 11);
    auto V = eval_basis<double>(BasisSpec::chebyshev(AffineMap::identity(2)), 3, p);
    auto idx = multi_indices(2, 3);
    for (int i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            EXPECT_NEAR(V(i, j), cheb_T(idx[j].e[0], p(i, 0)) * cheb_T(idx[j].e[1], p(i, 1)), 1e-14);
}

TEST(EvalBasis, RecurrenceMatchesClosedForm) {
    MatrixXd p = random_points(100, 5);
    auto spec = BasisSpec::chebyshev(AffineMap::identity(2));
    MatrixXd a = eval_basis<double>(spec, 10, p, EvalMode::recurrence);
    MatrixXd b = eval_basis<double>(spec, 10, p, EvalMode::closed_form);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EvalBasis, ClosedFormDomainError) {
    MatrixXd p(1, 2);
    p << 1.5, 0.0;
    EXPECT_THROW(eval_basis<double>(BasisSpec::chebyshev(AffineMap::identity(2)), 3, p, EvalMode::closed_form),
                 DomainError);
    MatrixXcd z(1, 2);
    z << cplx(0.2, 0.1), cplx(0.0);
    EXPECT_THROW(eval_basis<cplx>(BasisSpec::chebyshev(AffineMap::identity(2)), 3, z, EvalMode::closed_form),
                 DomainError);
}

TEST(EvalBasis, ComplexRecurrenceMatchesPolynomial) {
    MatrixXcd z(1, 2);
    z << cplx(1.5, 0.7), cplx(-0.3, 2.0);
    auto V = eval_basis<cplx>(BasisSpec::chebyshev(AffineMap::identity(2)), 3, z);
    auto T3 = [](cplx x) { return 4.0 * x * x * x - 3.0 * x; };
    auto T2 = [](cplx x) { return 2.0 * x * x - 1.0; };
    // (3,0) is the last column, (1,2) is column 7
    EXPECT_LE(std::abs(V(0, 9) - T3(z(0, 0))), 1e-13);
    EXPECT_LE(std::abs(V(0, 7) - z(0, 0) * T2(z(0, 1))), 1e-13);
}

TEST(EvalBasis, SpanEquality) {
    MatrixXd p = random_points(60, 17, -0.3, 2.2);
    const int k = 5;
    MatrixXd Vm = eval_basis<double>(BasisSpec::monomial(), k, p);
    MatrixXd Vc = eval_basis<double>(BasisSpec::chebyshev(bounding_affine_map(p)), k, p);
    Eigen::ColPivHouseholderQR<MatrixXd> qm(Vm), qc(Vc);
    EXPECT_EQ(qm.rank(), qc.rank());
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    for (int t = 0; t < 5; ++t) {
        VectorXd y(p.rows());
        for (int i = 0; i < y.size(); ++i) y(i) = g(rng);
        VectorXd rm = y - Vm * qm.solve(y), rc = y - Vc * qc.solve(y);
        EXPECT_NEAR(rm.norm(), rc.norm(), 1e-10 * y.norm());
    }
}

TEST(EvalBasisDerivatives, ConstantAndT2) {
    MatrixXd p(1, 2);
    p << 0.25, -0.4;
    auto D = eval_basis_derivatives<double>(BasisSpec::chebyshev(AffineMap::identity(2)), 2, p);
    EXPECT_EQ(D[0](0, 0), 0.0);
    EXPECT_EQ(D[1](0, 0), 0.0);
    EXPECT_NEAR(D[0](0, 5), 1.0, 1e-15);  // d/dx T2(x) = 4x at 0.25
}

TEST(EvalBasisDerivatives, FiniteDifferenceOracle) {
    MatrixXd p = random_points(30, 23, -0.9, 0.9);
    const double h = 1e-6;
    std::vector<BasisSpec> specs{BasisSpec::monomial(), BasisSpec::chebyshev(AffineMap{{-1.2, -0.5}, {1.0, 2.0}}),
                                 BasisSpec::koornwinder(AffineMap{{-1.0, -1.0}, {1.5, 1.5}})};
    for (const auto& spec : specs) {
        auto D = eval_basis_derivatives<double>(spec, 7, p);
        for (int m = 0; m < 2; ++m) {
            MatrixXd pp = p, pm = p;
            pp.col(m).array() += h;
            pm.col(m).array() -= h;
            MatrixXd fd = (eval_basis<double>(spec, 7, pp) - eval_basis<double>(spec, 7, pm)) / (2 * h);
            double scale = std::max(1.0, D[m].cwiseAbs().maxCoeff());
            EXPECT_LE((fd - D[m]).cwiseAbs().maxCoeff() / scale, 1e-7);
        }
    }
}

TEST(EvalBasisDerivatives, ComplexPointsAgreeWithRealPathOnRealInput) {
    MatrixXd p = random_points(10, 29);
    MatrixXcd z = p.cast<cplx>();
    auto spec = BasisSpec::chebyshev(AffineMap::identity(2));
    auto Dr = eval_basis_derivatives<double>(spec, 6, p);
    auto Dc = eval_basis_derivatives<cplx>(spec, 6, z);
    EXPECT_LE((Dr[1].cast<cplx>() - Dc[1]).cwiseAbs().maxCoeff(), 1e-14);
}

// log|det C| for basis = C * monomials, computed by interpolation on a
// unisolvent random point set.
double leading_det_oracle(const BasisSpec& spec, int k, std::uint32_t seed) {
    const int N = static_cast<int>(dimension(2, k));
    MatrixXd p = random_points(N, seed, 0.05, 0.45);
    MatrixXd Vm = eval_basis<double>(BasisSpec::monomial(), k, p);
    MatrixXd Vb = eval_basis<double>(spec, k, p);
    // Vb = Vm * C^T in row convention
    MatrixXd C = Vm.fullPivLu().solve(Vb);
    return std::log(std::abs(C.fullPivLu().determinant()));
}

TEST(LeadingDet, MatchesInterpolationOracle) {
    std::vector<BasisSpec> specs{BasisSpec::chebyshev(AffineMap::identity(2)),
                                 BasisSpec::chebyshev(AffineMap{{0.0, -0.5}, {1.0, 1.5}}),
                                 BasisSpec::koornwinder(AffineMap{{0.0, 0.0}, {1.0, 1.0}}),
                                 BasisSpec::koornwinder(AffineMap{{-0.2, 0.0}, {1.3, 0.8}})};
    for (const auto& s : specs)
        for (int k : {1, 2, 3, 4}) EXPECT_NEAR(log_abs_leading_det(s, k), leading_det_oracle(s, k, 41 + k), 1e-7);
    EXPECT_EQ(log_abs_leading_det(BasisSpec::monomial(), 5), 0.0);
}

TEST(Koornwinder, OrthonormalOnTriangle) {
    // Duffy-mapped Gauss-Legendre rule integrates polynomials on the triangle exactly.
    const int q = 20, k = 6;
    VectorXd x(q), w(q);
    {
        // Golub-Welsch for Legendre nodes on [-1,1]
        MatrixXd J = MatrixXd::Zero(q, q);
        for (int i = 1; i < q; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
        x = es.eigenvalues();
        w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    }
    MatrixXd p(q * q, 2);
    VectorXd wt(q * q);
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            double u = 0.5 * (x(a) + 1), v = 0.5 * (x(b) + 1);
            p(a * q + b, 0) = u * (1 - v);
            p(a * q + b, 1) = u * v;
            wt(a * q + b) = 0.25 * w(a) * w(b) * u;
        }
    auto V = eval_basis<double>(BasisSpec::koornwinder(AffineMap{{0.0, 0.0}, {1.0, 1.0}}), k, p);
    MatrixXd G = V.transpose() * wt.asDiagonal() * V;
    // orthonormal for plain area measure dx dy
    EXPECT_LE((G - MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff(), 1e-10);
}
