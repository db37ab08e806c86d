#include "doctest.h"

#include <random>
#include <vector>

#include "ehl/banded.hpp"

using namespace ehl;

namespace {

// dense Gaussian elimination with partial pivoting, oracle only
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            double m = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= m * A[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

} // namespace

TEST_CASE("identity bands return the rhs") {
    LineSystem sys(6);
    for (int i = 0; i < 6; ++i) {
        sys.at(i, 0) = 1.0;
        sys.rhs[i] = 3.0 * i - 1.0;
    }
    auto sigma = solve_banded(sys);
    for (int i = 0; i < 6; ++i) CHECK(sigma[i] == doctest::Approx(sys.rhs[i]));
}

TEST_CASE("tridiagonal multiply-then-solve round trip") {
    const int n = 40;
    std::vector<double> truth(n);
    for (int i = 0; i < n; ++i) truth[i] = std::sin(0.3 * i) + 0.1 * i;
    LineSystem sys(n);
    for (int i = 0; i < n; ++i) {
        if (i > 0) sys.at(i, -1) = -1.0;
        sys.at(i, 0) = 2.0;
        if (i < n - 1) sys.at(i, 1) = -1.0;
        double r = 2.0 * truth[i];
        if (i > 0) r -= truth[i - 1];
        if (i < n - 1) r -= truth[i + 1];
        sys.rhs[i] = r;
    }
    auto sigma = solve_banded(sys);
    double rmax = 0;
    for (int i = 0; i < n; ++i) rmax = std::max(rmax, std::fabs(sigma[i] - truth[i]));
    CHECK(rmax < 1e-12);
    CHECK(sys.residual_inf(sigma) < 1e-12);
}

TEST_CASE("random diagonally dominant pentadiagonal vs dense oracle") {
    const int n = 64;
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    LineSystem sys(n);
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        double offsum = 0;
        for (int k = -2; k <= 2; ++k) {
            if (k == 0) continue;
            int col = i + k;
            if (col < 0 || col >= n) continue;
            double v = dist(rng);
            sys.at(i, k) = v;
            A[i][col] = v;
            offsum += std::fabs(v);
        }
        double d = offsum + 1.0 + std::fabs(dist(rng));
        sys.at(i, 0) = d;
        A[i][i] = d;
        sys.rhs[i] = dist(rng);
    }
    auto x = solve_banded(sys);
    auto xref = dense_solve(A, sys.rhs);
    double err = 0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::fabs(x[i] - xref[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("residual bound for diagonally dominant bands") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + trial;
        LineSystem sys(n);
        double rn = 0;
        for (int i = 0; i < n; ++i) {
            double offsum = 0;
            for (int k = -2; k <= 2; ++k) {
                if (k == 0) continue;
                int col = i + k;
                if (col < 0 || col >= n) continue;
                double v = dist(rng);
                sys.at(i, k) = v;
                offsum += std::fabs(v);
            }
            sys.at(i, 0) = offsum + 0.5;
            sys.rhs[i] = dist(rng);
            rn = std::max(rn, std::fabs(sys.rhs[i]));
        }
        auto x = solve_banded(sys);
        CHECK(sys.residual_inf(x) <= 1e-12 * std::max(rn, 1.0));
    }
}

TEST_CASE("zero pivot raises singular-line error") {
    LineSystem sys(3);
    sys.at(0, 0) = 0.0;
    sys.at(0, 1) = 1.0;
    sys.at(1, -1) = 1.0;
    sys.at(1, 0) = 1.0;
    sys.at(2, 0) = 1.0;
    sys.rhs = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS((void)solve_banded(sys), singular_line_error);
}
