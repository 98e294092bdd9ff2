#include "aperiodic/substitution.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace aperiodic {

Substitution::Substitution(std::vector<char> alphabet, std::vector<std::vector<int>> rules)
    : alphabet_(std::move(alphabet)), rules_(std::move(rules)) {
    if (alphabet_.empty()) {
        throw std::invalid_argument("substitution needs at least one letter");
    }
    if (rules_.size() != alphabet_.size()) {
        throw std::invalid_argument("every letter needs exactly one rule");
    }
    for (const auto& r : rules_) {
        if (r.empty()) {
            throw std::invalid_argument("rule images must be nonempty");
        }
        for (int c : r) {
            if (c < 0 || c >= size()) {
                throw std::invalid_argument("rule image uses a letter outside the alphabet");
            }
        }
    }
}

int Substitution::index_of(char c) const {
    auto it = std::find(alphabet_.begin(), alphabet_.end(), c);
    return it == alphabet_.end() ? -1 : static_cast<int>(it - alphabet_.begin());
}

std::size_t Substitution::max_image_length() const {
    std::size_t n = 0;
    for (const auto& r : rules_) {
        n = std::max(n, r.size());
    }
    return n;
}

std::string Substitution::word(const std::vector<int>& letters) const {
    std::string w;
    w.reserve(letters.size());
    for (int c : letters) {
        w.push_back(letter(c));
    }
    return w;
}

namespace {

struct RawRule {
    char head;
    int head_line, head_col;
    std::string image;
    std::vector<std::pair<int, int>> image_pos;
};

} // namespace

Substitution parse_substitution(std::string_view text) {
    std::vector<RawRule> raw;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto peek = [&]() -> char { return i < text.size() ? text[i] : '\0'; };
    auto advance = [&]() {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto skip_blank = [&]() {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) {
            advance();
        }
    };
    auto is_letter = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };

    for (;;) {
        // Skip separators and blank space between rules.
        while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ';')) {
            advance();
        }
        if (i >= text.size()) {
            break;
        }
        RawRule r{};
        if (!is_letter(peek())) {
            throw ParseError(std::string("expected a letter, found '") + peek() + "'", line, col);
        }
        r.head = peek();
        r.head_line = line;
        r.head_col = col;
        advance();
        skip_blank();
        if (!(peek() == '-' && i + 1 < text.size() && text[i + 1] == '>')) {
            throw ParseError("expected '->'", line, col);
        }
        advance();
        advance();
        skip_blank();
        while (i < text.size() && text[i] != ';' && text[i] != '\n') {
            char c = text[i];
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
                continue;
            }
            if (!is_letter(c)) {
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
            }
            r.image.push_back(c);
            r.image_pos.emplace_back(line, col);
            advance();
        }
        if (r.image.empty()) {
            throw ParseError(std::string("empty image for letter '") + r.head + "'", line, col);
        }
        for (const auto& prev : raw) {
            if (prev.head == r.head) {
                throw ParseError(std::string("duplicate rule for letter '") + r.head + "'", r.head_line, r.head_col);
            }
        }
        raw.push_back(std::move(r));
    }
    if (raw.empty()) {
        throw ParseError("empty input", line, col);
    }
    std::vector<char> alphabet;
    for (const auto& r : raw) {
        alphabet.push_back(r.head);
    }
    std::vector<std::vector<int>> rules;
    for (const auto& r : raw) {
        std::vector<int> img;
        for (std::size_t k = 0; k < r.image.size(); ++k) {
            auto it = std::find(alphabet.begin(), alphabet.end(), r.image[k]);
            if (it == alphabet.end()) {
                throw ParseError(std::string("unknown letter '") + r.image[k] + "'", r.image_pos[k].first,
                                 r.image_pos[k].second);
            }
            img.push_back(static_cast<int>(it - alphabet.begin()));
        }
        rules.push_back(std::move(img));
    }
    return Substitution(std::move(alphabet), std::move(rules));
}

std::string format_substitution(const Substitution& s) {
    std::string out;
    for (int i = 0; i < s.size(); ++i) {
        if (i > 0) {
            out += "; ";
        }
        out += s.letter(i);
        out += " -> ";
        out += s.word(s.image(i));
    }
    return out;
}

IntMatrix substitution_matrix(const Substitution& s) {
    const auto m = static_cast<std::size_t>(s.size());
    IntMatrix out(m, std::vector<BigInt>(m, BigInt(0)));
    for (std::size_t j = 0; j < m; ++j) {
        for (int c : s.image(static_cast<int>(j))) {
            out[static_cast<std::size_t>(c)][j] += 1;
        }
    }
    return out;
}

IntMatrix matrix_multiply(const IntMatrix& a, const IntMatrix& b) {
    const std::size_t n = a.size();
    const std::size_t k = b.size();
    const std::size_t m = b.empty() ? 0 : b[0].size();
    IntMatrix out(n, std::vector<BigInt>(m, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    return out;
}

IntMatrix matrix_power(const IntMatrix& m, unsigned k) {
    const std::size_t n = m.size();
    IntMatrix result(n, std::vector<BigInt>(n, BigInt(0)));
    for (std::size_t i = 0; i < n; ++i) {
        result[i][i] = 1;
    }
    IntMatrix base = m;
    while (k > 0) {
        if (k & 1U) {
            result = matrix_multiply(result, base);
        }
        k >>= 1U;
        if (k > 0) {
            base = matrix_multiply(base, base);
        }
    }
    return result;
}

std::size_t matrix_rank(const IntMatrix& m) {
    std::vector<std::vector<Rational>> a;
    for (const auto& row : m) {
        std::vector<Rational> r;
        for (const auto& x : row) {
            r.emplace_back(x);
        }
        a.push_back(std::move(r));
    }
    const std::size_t rows = a.size();
    const std::size_t cols = rows == 0 ? 0 : a[0].size();
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && sgn(a[p][c]) == 0) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(a[p], a[rank]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r != rank && sgn(a[r][c]) != 0) {
                Rational f = a[r][c] / a[rank][c];
                for (std::size_t j = c; j < cols; ++j) {
                    a[r][j] -= f * a[rank][j];
                }
            }
        }
        ++rank;
    }
    return rank;
}

Polynomial characteristic_polynomial(const IntMatrix& m) {
    // Faddeev-LeVerrier.
    const std::size_t n = m.size();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = Rational(m[i][j]);
        }
    }
    Polynomial c(n + 1, Rational(0));
    c[n] = 1;
    std::vector<std::vector<Rational>> mk(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t k = 1; k <= n; ++k) {
        // mk <- a * mk + c[n-k+1] I
        std::vector<std::vector<Rational>> next(n, std::vector<Rational>(n, Rational(0)));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) {
                if (sgn(a[i][l]) == 0) {
                    continue;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    next[i][j] += a[i][l] * mk[l][j];
                }
            }
            next[i][i] += c[n - k + 1];
        }
        mk = std::move(next);
        Rational tr(0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) {
                tr += a[i][l] * mk[l][i];
            }
        }
        c[n - k] = -tr / static_cast<long>(k);
    }
    return c;
}

std::string format_matrix(const IntMatrix& m) {
    std::string out = "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += i ? ",[" : "[";
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            if (j) {
                out += ",";
            }
            out += m[i][j].get_str();
        }
        out += "]";
    }
    return out + "]";
}

std::vector<bool> legal_two_letter_words(const Substitution& s) {
    const auto m = static_cast<std::size_t>(s.size());
    std::vector<bool> legal(m * m, false);
    std::vector<std::pair<int, int>> work;
    auto add = [&](int x, int y) {
        std::size_t k = static_cast<std::size_t>(x) * m + static_cast<std::size_t>(y);
        if (!legal[k]) {
            legal[k] = true;
            work.emplace_back(x, y);
        }
    };
    for (int c = 0; c < s.size(); ++c) {
        const auto& img = s.image(c);
        for (std::size_t k = 1; k < img.size(); ++k) {
            add(img[k - 1], img[k]);
        }
    }
    // xy legal => the factors of sigma(x)sigma(y) are legal; only the seam is new.
    while (!work.empty()) {
        auto [x, y] = work.back();
        work.pop_back();
        add(s.image(x).back(), s.image(y).front());
    }
    return legal;
}

FixedPointSeed fixed_point_seed(const Substitution& s) {
    if (!is_primitive_matrix(substitution_matrix(s))) {
        throw NotPrimitive("fixed point seeds need a primitive substitution");
    }
    const int m = s.size();
    std::vector<bool> legal = legal_two_letter_words(s);
    std::vector<int> first(static_cast<std::size_t>(m)), last(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
        first[static_cast<std::size_t>(c)] = c;
        last[static_cast<std::size_t>(c)] = c;
    }
    for (int k = 1; k <= m * m; ++k) {
        for (int c = 0; c < m; ++c) {
            first[static_cast<std::size_t>(c)] = s.image(first[static_cast<std::size_t>(c)]).front();
            last[static_cast<std::size_t>(c)] = s.image(last[static_cast<std::size_t>(c)]).back();
        }
        for (int l = 0; l < m; ++l) {
            if (last[static_cast<std::size_t>(l)] != l) {
                continue;
            }
            for (int r = 0; r < m; ++r) {
                if (first[static_cast<std::size_t>(r)] == r &&
                    legal[static_cast<std::size_t>(l) * static_cast<std::size_t>(m) + static_cast<std::size_t>(r)]) {
                    return {k, l, r};
                }
            }
        }
    }
    throw NotPrimitive("no legal fixed point seed with power <= m^2");
}

SupertileStream::SupertileStream(const Substitution& s, int letter, unsigned level, bool reverse)
    : s_(&s), reverse_(reverse) {
    if (letter < 0 || letter >= s.size()) {
        throw std::invalid_argument("letter index out of range");
    }
    stack_.push_back({letter, level, 0});
}

bool SupertileStream::next(int& letter) {
    while (!stack_.empty()) {
        Frame& f = stack_.back();
        if (f.level == 0) {
            letter = f.letter;
            stack_.pop_back();
            return true;
        }
        const auto& img = s_->image(f.letter);
        if (f.child == img.size()) {
            stack_.pop_back();
            continue;
        }
        int c = reverse_ ? img[img.size() - 1 - f.child] : img[f.child];
        ++f.child;
        unsigned lv = f.level - 1;
        stack_.push_back({c, lv, 0});
    }
    return false;
}

BigInt supertile_length(const IntMatrix& m, int letter, unsigned level) {
    IntMatrix p = matrix_power(m, level);
    BigInt n(0);
    for (const auto& row : p) {
        n += row[static_cast<std::size_t>(letter)];
    }
    return n;
}

std::string expand_supertile(const Substitution& s, int letter, unsigned level, std::size_t limit) {
    BigInt n = supertile_length(substitution_matrix(s), letter, level);
    if (n > BigInt(static_cast<unsigned long>(limit))) {
        throw CapacityExceeded("supertile of length " + n.get_str() + " exceeds the materialisation limit " +
                               std::to_string(limit) + "; use SupertileStream");
    }
    std::string out;
    out.reserve(n.get_ui());
    SupertileStream st(s, letter, level);
    int c = 0;
    while (st.next(c)) {
        out.push_back(s.letter(c));
    }
    return out;
}

namespace {

// Smallest multiple j*power with |sigma^(j*power)(letter)| >= n.
unsigned level_for_length(const Substitution& s, int letter, unsigned power, std::size_t n) {
    IntMatrix m = substitution_matrix(s);
    IntMatrix mp = matrix_power(m, power);
    const auto sz = static_cast<std::size_t>(s.size());
    std::vector<BigInt> counts(sz, BigInt(0));
    counts[static_cast<std::size_t>(letter)] = 1;
    unsigned level = 0;
    BigInt target(static_cast<unsigned long>(n));
    for (int guard = 0; guard < 4096; ++guard) {
        BigInt len(0);
        for (const auto& c : counts) {
            len += c;
        }
        if (len >= target) {
            return level;
        }
        std::vector<BigInt> next(sz, BigInt(0));
        for (std::size_t i = 0; i < sz; ++i) {
            for (std::size_t j = 0; j < sz; ++j) {
                next[i] += mp[i][j] * counts[j];
            }
        }
        if (next == counts) {
            break;
        }
        counts = std::move(next);
        level += power;
    }
    throw std::invalid_argument("substitution does not grow; no expanding fixed point");
}

} // namespace

PointSet generate_point_set(const Substitution& s, const PerronData& pd, const FixedPointSeed& seed,
                            std::size_t count_each_side) {
    if (!pd.is_primitive) {
        throw NotPrimitive("point sets need a primitive substitution");
    }
    if (count_each_side < 1) {
        throw std::invalid_argument("count_each_side must be >= 1");
    }
    const auto m = static_cast<std::size_t>(s.size());
    const std::size_t n = count_each_side;
    std::vector<long double> len(m);
    for (std::size_t i = 0; i < m; ++i) {
        len[i] = pd.left_eigvec[i].to_long_double();
    }
    const std::size_t total = 2 * n + 1;
    std::vector<double> values(total);
    std::vector<std::int64_t> coeff(total * m, 0);

    // Right side: prefix of sigma^L(right).
    {
        unsigned level = level_for_length(s, seed.right, static_cast<unsigned>(seed.power), n);
        SupertileStream st(s, seed.right, level);
        std::vector<std::int64_t> counts(m, 0);
        values[n] = 0.0;
        int c = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            st.next(c);
            ++counts[static_cast<std::size_t>(c)];
            long double x = 0;
            for (std::size_t i = 0; i < m; ++i) {
                x += static_cast<long double>(counts[i]) * len[i];
                coeff[(n + k) * m + i] = counts[i];
            }
            values[n + k] = static_cast<double>(x);
        }
    }
    // Left side: suffix of sigma^L(left), read backwards.
    {
        unsigned level = level_for_length(s, seed.left, static_cast<unsigned>(seed.power), n);
        SupertileStream st(s, seed.left, level, true);
        std::vector<std::int64_t> counts(m, 0);
        int c = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            st.next(c);
            --counts[static_cast<std::size_t>(c)];
            long double x = 0;
            for (std::size_t i = 0; i < m; ++i) {
                x += static_cast<long double>(counts[i]) * len[i];
                coeff[(n - k) * m + i] = counts[i];
            }
            values[n - k] = static_cast<double>(x);
        }
    }
    ExactCoordinates exact{pd.left_eigvec, std::move(coeff)};
    return PointSet(std::move(values), n, pd.density, std::move(exact));
}

PointSet generate_point_set(const Substitution& s, std::size_t count_each_side) {
    return generate_point_set(s, classify(s), fixed_point_seed(s), count_each_side);
}

} // namespace aperiodic
