#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aperiodic/numerics.hpp"
#include "aperiodic/point_set.hpp"

namespace aperiodic {

// Letters are single ASCII alphanumerics; rules are stored as letter indices.
class Substitution {
public:
    Substitution(std::vector<char> alphabet, std::vector<std::vector<int>> rules);

    int size() const { return static_cast<int>(alphabet_.size()); }
    const std::vector<char>& alphabet() const { return alphabet_; }
    char letter(int i) const { return alphabet_.at(static_cast<std::size_t>(i)); }
    // -1 when absent.
    int index_of(char c) const;
    const std::vector<int>& image(int i) const { return rules_.at(static_cast<std::size_t>(i)); }
    std::size_t max_image_length() const;
    std::string word(const std::vector<int>& letters) const;

    friend bool operator==(const Substitution& a, const Substitution& b) {
        return a.alphabet_ == b.alphabet_ && a.rules_ == b.rules_;
    }

private:
    std::vector<char> alphabet_;
    std::vector<std::vector<int>> rules_;
};

// "a -> ab; b -> a"; newlines also separate rules.
Substitution parse_substitution(std::string_view text);
std::string format_substitution(const Substitution& s);

// Row-major square matrix of big integers.
using IntMatrix = std::vector<std::vector<BigInt>>;

// Entry (i, j) counts letter i in the image of letter j.
IntMatrix substitution_matrix(const Substitution& s);
IntMatrix matrix_multiply(const IntMatrix& a, const IntMatrix& b);
IntMatrix matrix_power(const IntMatrix& m, unsigned k);
std::size_t matrix_rank(const IntMatrix& m);
// det(xI - M), lowest degree first.
Polynomial characteristic_polynomial(const IntMatrix& m);
std::string format_matrix(const IntMatrix& m);
// Some power M^p with p = (m-1)m + 1 is entrywise positive.
bool is_primitive_matrix(const IntMatrix& m);

struct PerronData {
    RealValue lambda;
    // Natural tile lengths.
    std::vector<RealValue> left_eigvec;
    // Letter frequencies, summing to 1.
    std::vector<RealValue> right_eigvec_normalized;
    std::vector<std::complex<double>> conjugates;
    double c_sigma = 0.0;
    bool is_pisot = false;
    bool is_primitive = false;
    std::optional<int> diagonalizable_power;
    Polynomial char_poly;
    // dens^-1 = sum_i v_i l_i, and its inverse.
    RealValue mean_spacing;
    RealValue density;
};

PerronData classify(const Substitution& s, double tol = kDefaultTol);
// Rescales the tile lengths so that the first one equals `first_length`.
PerronData with_first_tile_length(const PerronData& pd, const RealValue& first_length);

struct FixedPointSeed {
    int power = 1;
    int left = 0;
    int right = 0;
};

// Two-letter words occurring in some iterate, as a flat m*m table.
std::vector<bool> legal_two_letter_words(const Substitution& s);
FixedPointSeed fixed_point_seed(const Substitution& s);

// Streams the letters of sigma^level(letter) left to right (or right to left)
// with an explicit stack, so the word never has to be materialised.
class SupertileStream {
public:
    SupertileStream(const Substitution& s, int letter, unsigned level, bool reverse = false);
    bool next(int& letter);

private:
    struct Frame {
        int letter;
        unsigned level;
        std::size_t child;
    };
    const Substitution* s_;
    bool reverse_;
    std::vector<Frame> stack_;
};

inline constexpr std::size_t kDefaultMaterializeLimit = std::size_t{1} << 26;

std::string expand_supertile(const Substitution& s, int letter, unsigned level,
                             std::size_t limit = kDefaultMaterializeLimit);
BigInt supertile_length(const IntMatrix& m, int letter, unsigned level);

// Left endpoints of the tiles of the bi-infinite fixed point, count_each_side
// points on each side of x_0 = 0, with exact letter-count coordinates.
PointSet generate_point_set(const Substitution& s, const PerronData& pd, const FixedPointSeed& seed,
                            std::size_t count_each_side);
PointSet generate_point_set(const Substitution& s, std::size_t count_each_side);

struct ErrorProfile {
    // epsilon[i][k]
    std::vector<std::vector<double>> epsilon;
    // Signed extremes of x_j - j*a inside each supertile.
    std::vector<std::vector<double>> deviation_hi;
    std::vector<std::vector<double>> deviation_lo;
    // delta[i][k] = lambda^k l_i - n_k^i a
    std::vector<std::vector<double>> delta;
    double c_max = 0.0;
    double n_tiles = 0.0;
    double C = 0.0;
    double c_sigma = 0.0;
    double eps0_max = 0.0;
    double theoretical_bound = 0.0;
    int max_level = 0;
    // True when C_max came from the eigendecomposition rather than observed ratios.
    bool spectral_constant = true;
};

ErrorProfile error_profile(const Substitution& s, const PerronData& pd, int max_level);

} // namespace aperiodic
