#include "latmscale/combinatorics.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

namespace latms::exact {

namespace {

// Triangle caches grown on demand; guarded so concurrent readers are safe.
std::mutex s1_mutex;
std::vector<std::vector<BigInt>> s1_rows;  // s1_rows[i][k] = s(i,k)

std::mutex s2_mutex;
std::vector<std::vector<BigInt>> s2_rows;  // s2_rows[k][j] = S(k,j)

std::mutex leg_mutex;
std::vector<Rational> leg_vals;  // P_i(0)

void grow_first(int i) {
    if (s1_rows.empty()) s1_rows.push_back({BigInt(1)});
    while (static_cast<int>(s1_rows.size()) <= i) {
        const int n = static_cast<int>(s1_rows.size());  // building row n from row n-1
        const auto& prev = s1_rows.back();
        std::vector<BigInt> row(n + 1);
        for (int k = 0; k <= n; ++k) {
            // s(n,k) = s(n-1,k-1) - (n-1) * s(n-1,k)
            BigInt v = 0;
            if (k >= 1 && k - 1 < static_cast<int>(prev.size())) v += prev[k - 1];
            if (k < static_cast<int>(prev.size())) v -= BigInt(n - 1) * prev[k];
            row[k] = std::move(v);
        }
        s1_rows.push_back(std::move(row));
    }
}

void grow_second(int k) {
    if (s2_rows.empty()) s2_rows.push_back({BigInt(1)});
    while (static_cast<int>(s2_rows.size()) <= k) {
        const int n = static_cast<int>(s2_rows.size());
        const auto& prev = s2_rows.back();
        std::vector<BigInt> row(n + 1);
        for (int j = 0; j <= n; ++j) {
            // S(n,j) = j * S(n-1,j) + S(n-1,j-1)
            BigInt v = 0;
            if (j < static_cast<int>(prev.size())) v += BigInt(j) * prev[j];
            if (j >= 1 && j - 1 < static_cast<int>(prev.size())) v += prev[j - 1];
            row[j] = std::move(v);
        }
        s2_rows.push_back(std::move(row));
    }
}

}  // namespace

BigInt stirling_first(int i, int k) {
    if (i < 0 || k < 0) throw std::domain_error("stirling_first: negative argument");
    if (k > i) return 0;
    std::lock_guard<std::mutex> lock(s1_mutex);
    grow_first(i);
    return s1_rows[i][k];
}

BigInt stirling_second(int k, int j) {
    if (k < 0 || j < 0) throw std::domain_error("stirling_second: negative argument");
    if (j > k) return 0;
    std::lock_guard<std::mutex> lock(s2_mutex);
    grow_second(k);
    return s2_rows[k][j];
}

Rational legendre_at_zero(int i) {
    if (i < 0) throw std::domain_error("legendre_at_zero: negative argument");
    if (i % 2 == 1) return 0;
    std::lock_guard<std::mutex> lock(leg_mutex);
    if (leg_vals.empty()) {
        leg_vals.push_back(Rational(1));
        leg_vals.push_back(Rational(0));
    }
    while (static_cast<int>(leg_vals.size()) <= i) {
        // Bonnet at x=0: (n+1) P_{n+1}(0) = -n P_{n-1}(0)
        const int n = static_cast<int>(leg_vals.size()) - 1;
        leg_vals.push_back(Rational(-n) / Rational(n + 1) * leg_vals[n - 1]);
    }
    return leg_vals[i];
}

Rational lattice_coeff_P(int i, int j, const Rational& omega) {
    if (i < 0 || j < 0) throw std::domain_error("lattice_coeff_P: negative argument");
    if (j > i) return 0;
    Rational sum = 0;
    for (int k = j; k <= i; ++k) {
        sum += rational_pow(omega, k) * Rational(stirling_first(i, k) * stirling_second(k, j));
    }
    return sum;
}

Rational lattice_coeff_Q(int i, int j, const Rational& omega) {
    if (omega == 0) throw std::domain_error("lattice_coeff_Q: omega must be nonzero");
    return lattice_coeff_P(i, j, Rational(1) / omega);
}

}  // namespace latms::exact
