#pragma once

// Pentadiagonal line systems and their O(n) elimination solve.
// Bands are stored per row: band[k][i] multiplies sigma_{i+k-2}, k = 0..4.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehl {

struct singular_line_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LineSystem {
    std::array<std::vector<double>, 5> band;   // offsets -2..+2
    std::vector<double> rhs;

    explicit LineSystem(int n = 0) { resize(n); }

    void resize(int n) {
        for (auto& b : band) b.assign(static_cast<size_t>(n), 0.0);
        rhs.assign(static_cast<size_t>(n), 0.0);
    }
    int size() const { return static_cast<int>(rhs.size()); }

    double& at(int row, int offset) { return band[offset + 2][static_cast<size_t>(row)]; }
    double at(int row, int offset) const { return band[offset + 2][static_cast<size_t>(row)]; }

    // Residual of a candidate solution, infinity norm.
    double residual_inf(const std::vector<double>& sigma) const {
        int n = size();
        double r = 0;
        for (int i = 0; i < n; ++i) {
            double s = rhs[i];
            for (int k = -2; k <= 2; ++k) {
                int col = i + k;
                if (col >= 0 && col < n) s -= at(i, k) * sigma[static_cast<size_t>(col)];
            }
            r = std::max(r, std::fabs(s));
        }
        return r;
    }
};

// Gaussian elimination without pivoting. The splittings deliver diagonally
// dominant bands; a vanishing pivot aborts the sweep rather than being
// patched up silently.
inline std::vector<double> solve_banded(LineSystem system) {
    const int n = system.size();
    if (n == 0) return {};
    auto& b = system.band;
    auto& r = system.rhs;

    double scale = 0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(b[2][static_cast<size_t>(i)]));
    const double tiny = 1e-30 * std::max(1.0, scale);

    for (int i = 0; i < n; ++i) {
        double piv = b[2][static_cast<size_t>(i)];
        if (std::fabs(piv) <= tiny)
            throw singular_line_error("solve_banded: zero pivot at row " + std::to_string(i));
        // eliminate rows i+1 and i+2 in column i
        if (i + 1 < n) {
            double m = b[1][static_cast<size_t>(i + 1)] / piv;
            if (m != 0.0) {
                b[1][static_cast<size_t>(i + 1)] = 0.0;
                b[2][static_cast<size_t>(i + 1)] -= m * b[3][static_cast<size_t>(i)];
                b[3][static_cast<size_t>(i + 1)] -= m * b[4][static_cast<size_t>(i)];
                r[static_cast<size_t>(i + 1)] -= m * r[static_cast<size_t>(i)];
            }
        }
        if (i + 2 < n) {
            double m = b[0][static_cast<size_t>(i + 2)] / piv;
            if (m != 0.0) {
                b[0][static_cast<size_t>(i + 2)] = 0.0;
                b[1][static_cast<size_t>(i + 2)] -= m * b[3][static_cast<size_t>(i)];
                b[2][static_cast<size_t>(i + 2)] -= m * b[4][static_cast<size_t>(i)];
                r[static_cast<size_t>(i + 2)] -= m * r[static_cast<size_t>(i)];
            }
        }
    }

    std::vector<double> sigma(static_cast<size_t>(n), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = r[static_cast<size_t>(i)];
        if (i + 1 < n) s -= b[3][static_cast<size_t>(i)] * sigma[static_cast<size_t>(i + 1)];
        if (i + 2 < n) s -= b[4][static_cast<size_t>(i)] * sigma[static_cast<size_t>(i + 2)];
        sigma[static_cast<size_t>(i)] = s / b[2][static_cast<size_t>(i)];
    }
    return sigma;
}

} // namespace ehl
