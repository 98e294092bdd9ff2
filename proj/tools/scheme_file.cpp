#include "scheme_file.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <vector>

namespace aperiodic {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

class LineReader {
public:
    LineReader(std::string_view value, int line, int column) : s_(value), line_(line), col0_(column) {}

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col0_ + static_cast<int>(pos_)); }

    RealValue expr(std::size_t begin, std::size_t end) const {
        try {
            return parse_real(s_.substr(begin, end - begin));
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()).substr(0, std::string(e.what()).rfind(" (line")), line_,
                             col0_ + static_cast<int>(begin) + e.column() - 1);
        }
    }

    // Comma separated expressions up to the end of the value.
    std::vector<RealValue> list() {
        std::vector<RealValue> out;
        std::size_t start = 0;
        int depth = 0;
        for (std::size_t i = 0; i <= s_.size(); ++i) {
            if (i == s_.size() || (s_[i] == ',' && depth == 0)) {
                pos_ = start;
                out.push_back(expr(start, i));
                start = i + 1;
            } else if (s_[i] == '(') {
                ++depth;
            } else if (s_[i] == ')') {
                --depth;
            }
        }
        return out;
    }

    // Groups open ... close containing comma separated expressions.
    std::vector<std::vector<RealValue>> groups(char open, char close) {
        std::vector<std::vector<RealValue>> out;
        pos_ = 0;
        for (;;) {
            while (pos_ < s_.size() && (std::isspace(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == ';')) {
                ++pos_;
            }
            if (pos_ == s_.size()) {
                return out;
            }
            if (s_[pos_] != open) {
                fail(std::string("expected '") + open + "'");
            }
            std::vector<RealValue> g;
            std::size_t start = ++pos_;
            int depth = 0;
            for (;; ++pos_) {
                if (pos_ == s_.size()) {
                    fail(std::string("missing '") + close + "'");
                }
                const char c = s_[pos_];
                if (depth == 0 && (c == ',' || c == close)) {
                    g.push_back(expr(start, pos_));
                    start = pos_ + 1;
                    if (c == close) {
                        ++pos_;
                        break;
                    }
                } else if (c == '(') {
                    ++depth;
                } else if (c == ')') {
                    --depth;
                }
            }
            out.push_back(std::move(g));
        }
    }

private:
    std::string_view s_;
    int line_;
    int col0_;
    std::size_t pos_ = 0;
};

} // namespace

CutProjectScheme parse_scheme_file(std::string_view text) {
    std::vector<std::vector<RealValue>> columns;
    std::optional<Window> window;
    std::vector<RealValue> offset;
    int line_no = 0;
    std::size_t at = 0;
    while (at <= text.size()) {
        std::size_t nl = text.find('\n', at);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view raw = text.substr(at, nl - at);
        at = nl + 1;
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) {
            raw = raw.substr(0, hash);
        }
        if (trim(raw).empty()) {
            continue;
        }
        const std::size_t eq = raw.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("expected 'key = value'", line_no, 1);
        }
        const std::string key = trim(raw.substr(0, eq));
        std::string_view value = raw.substr(eq + 1);
        LineReader rd(value, line_no, static_cast<int>(eq) + 2);
        if (key == "column") {
            columns.push_back(rd.list());
        } else if (key == "offset") {
            offset = rd.list();
        } else if (key == "window") {
            if (window) {
                throw ParseError("window given twice", line_no, 1);
            }
            // Intervals are written [lo, hi); the closing ')' is accepted as ']' too.
            std::string v(value);
            for (auto& c : v) {
                if (c == ']') {
                    c = ')';
                }
            }
            LineReader iv(v, line_no, static_cast<int>(eq) + 2);
            std::vector<Interval> parts;
            for (auto& g : iv.groups('[', ')')) {
                if (g.size() != 2) {
                    throw ParseError("an interval needs two endpoints", line_no, static_cast<int>(eq) + 2);
                }
                parts.push_back({g[0], g[1]});
            }
            try {
                window = IntervalUnion(std::move(parts));
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_no, static_cast<int>(eq) + 2);
            }
        } else if (key == "polygon") {
            if (window) {
                throw ParseError("window given twice", line_no, 1);
            }
            Polygon p;
            for (auto& g : rd.groups('(', ')')) {
                if (g.size() != 2) {
                    throw ParseError("a vertex needs two coordinates", line_no, static_cast<int>(eq) + 2);
                }
                p.vertices.push_back({g[0].to_double(), g[1].to_double()});
            }
            window = std::move(p);
        } else {
            throw ParseError("unknown key '" + key + "'", line_no, 1);
        }
    }
    if (columns.empty()) {
        throw ParseError("no 'column' lines", line_no, 1);
    }
    if (!window) {
        throw ParseError("no 'window' or 'polygon' line", line_no, 1);
    }
    const std::size_t rank = columns.size();
    RealMatrix basis(rank, std::vector<RealValue>(rank));
    for (std::size_t j = 0; j < rank; ++j) {
        if (columns[j].size() != rank) {
            throw ParseError("column " + std::to_string(j + 1) + " has " + std::to_string(columns[j].size()) +
                                 " entries, expected " + std::to_string(rank),
                             line_no, 1);
        }
        for (std::size_t i = 0; i < rank; ++i) {
            basis[i][j] = columns[j][i];
        }
    }
    try {
        return CutProjectScheme(std::move(basis), std::move(*window), std::move(offset));
    } catch (const ParseError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no, 1);
    }
}

} // namespace aperiodic
