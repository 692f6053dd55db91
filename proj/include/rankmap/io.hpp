#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankmap/cssd.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/sparse_matrix.hpp"

namespace rankmap {

enum class MatrixFormat { raw_f64, matrix_market };

namespace detail {

constexpr char kRawMagic[4] = {'R', 'M', 'A', 'P'};
constexpr std::size_t kRawHeaderBytes = 16;  // magic, u32 rows, u32 cols, 4 reserved

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) out.push_back(static_cast<char>((bits >> s) & 0xff));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<std::uint8_t>(in[at + b]);
    return v;
}

inline double get_f64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<std::uint8_t>(in[at + b]);
    return std::bit_cast<double>(v);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open " + path, 0);
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw Error("write failed for " + path);
}

// snprintf with %.17g prints every double so that parsing recovers the exact
// bit pattern.
inline void append_double(std::string& out, double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

// Cursor over a text file that hands out whitespace-separated tokens and
// remembers byte offsets for error reporting.
class TextCursor {
public:
    TextCursor(const std::string& data, std::string path)
        : data_(data), path_(std::move(path)) {}

    std::size_t offset() const { return pos_; }
    const std::string& path() const { return path_; }

    // Offset of the next token, past any whitespace and comments.
    std::size_t next_offset() {
        skip_space_and_comments(true);
        return pos_;
    }

    [[noreturn]] void fail(const std::string& what, std::size_t at) const {
        throw ParseError(path_ + ": " + what, at);
    }

    void skip_space_and_comments(bool comments) {
        while (pos_ < data_.size()) {
            const char c = data_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (comments && c == '%') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    // Next token; empty at end of input.
    std::pair<std::size_t, std::string_view> token(bool comments = true) {
        skip_space_and_comments(comments);
        const std::size_t begin = pos_;
        while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_])))
            ++pos_;
        return {begin, std::string_view(data_).substr(begin, pos_ - begin)};
    }

    std::uint64_t expect_u64(const char* what) {
        const auto [at, tok] = token();
        if (tok.empty()) fail(std::string("expected ") + what + ", found end of file", at);
        std::uint64_t v = 0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            fail(std::string("expected ") + what, at);
        return v;
    }

    double expect_double(const char* what) {
        const auto [at, tok] = token();
        if (tok.empty()) fail(std::string("expected ") + what + ", found end of file", at);
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            fail(std::string("expected ") + what, at);
        return v;
    }

    // Reads one whole line (for the banner) and advances past it.
    std::string_view line() {
        const std::size_t begin = pos_;
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
        const auto v = std::string_view(data_).substr(begin, pos_ - begin);
        if (pos_ < data_.size()) ++pos_;
        return v;
    }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_raw_f64(const DenseMatrix& a, const std::string& path) {
    if (a.rows() > UINT32_MAX || a.cols() > UINT32_MAX)
        throw InvalidArgumentError("save_raw_f64: dimensions exceed the u32 header fields");
    std::string out;
    out.reserve(detail::kRawHeaderBytes + 8 * a.rows() * a.cols());
    out.append(detail::kRawMagic, 4);
    detail::put_u32(out, static_cast<std::uint32_t>(a.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(a.cols()));
    detail::put_u32(out, 0);
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) detail::put_f64(out, a(i, j));
    detail::write_file(path, out);
}

inline DenseMatrix load_raw_f64(const std::string& path) {
    const std::string data = detail::read_file(path);
    if (data.size() < detail::kRawHeaderBytes)
        throw ParseError(path + ": truncated header", data.size());
    if (std::memcmp(data.data(), detail::kRawMagic, 4) != 0)
        throw ParseError(path + ": bad magic", 0);
    const std::uint64_t m = detail::get_u32(data, 4);
    const std::uint64_t n = detail::get_u32(data, 8);
    if (m == 0 || n == 0) throw ParseError(path + ": zero dimension", 4);
    if (m * n > (SIZE_MAX - detail::kRawHeaderBytes) / 8)
        throw ParseError(path + ": dimensions overflow addressable payload", 4);
    const std::size_t expected = detail::kRawHeaderBytes + 8 * m * n;
    if (data.size() < expected) throw ParseError(path + ": truncated payload", data.size());
    if (data.size() > expected) throw ParseError(path + ": trailing bytes", expected);
    DenseMatrix a(m, n);
    std::size_t at = detail::kRawHeaderBytes;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i, at += 8) a(i, j) = detail::get_f64(data, at);
    return a;
}

inline void save_matrix_market(const DenseMatrix& a, const std::string& path) {
    std::string out = "%%MatrixMarket matrix array real general\n";
    out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) {
            detail::append_double(out, a(i, j));
            out.push_back('\n');
        }
    detail::write_file(path, out);
}

inline void save_matrix_market(const SparseColMatrix& v, const std::string& path) {
    std::string out = "%%MatrixMarket matrix coordinate real general\n";
    out += std::to_string(v.rows()) + " " + std::to_string(v.cols()) + " " +
           std::to_string(v.nnz()) + "\n";
    const auto& cp = v.col_ptr();
    const auto& ri = v.row_idx();
    const auto& vs = v.values();
    for (std::size_t j = 0; j < v.cols(); ++j)
        for (std::size_t t = cp[j]; t < cp[j + 1]; ++t) {
            out += std::to_string(ri[t] + 1) + " " + std::to_string(j + 1) + " ";
            detail::append_double(out, vs[t]);
            out.push_back('\n');
        }
    detail::write_file(path, out);
}

namespace detail {

// Banner: "%%MatrixMarket matrix <array|coordinate> real general".
inline bool parse_banner(TextCursor& cur, const std::string& data) {
    if (data.substr(0, 14) != "%%MatrixMarket") cur.fail("missing MatrixMarket banner", 0);
    std::string banner(cur.line());
    for (char& c : banner) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool coordinate = banner.find(" coordinate ") != std::string::npos;
    const bool array = banner.find(" array ") != std::string::npos;
    if (!coordinate && !array) cur.fail("banner must declare array or coordinate", 0);
    if (banner.find(" matrix ") == std::string::npos) cur.fail("banner must declare matrix", 0);
    if (banner.find(" real ") == std::string::npos) cur.fail("only real matrices supported", 0);
    if (banner.find(" general") == std::string::npos)
        cur.fail("only general symmetry supported", 0);
    return coordinate;
}

}  // namespace detail

inline DenseMatrix load_matrix_market_dense(const std::string& path) {
    const std::string data = detail::read_file(path);
    detail::TextCursor cur(data, path);
    const bool coordinate = detail::parse_banner(cur, data);
    const std::uint64_t m = cur.expect_u64("row count");
    const std::uint64_t n = cur.expect_u64("column count");
    if (m == 0 || n == 0) cur.fail("zero dimension", cur.offset());
    DenseMatrix a(m, n);
    if (!coordinate) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < m; ++i) a(i, j) = cur.expect_double("matrix entry");
    } else {
        const std::uint64_t nnz = cur.expect_u64("entry count");
        for (std::uint64_t t = 0; t < nnz; ++t) {
            const std::size_t at = cur.next_offset();
            const std::uint64_t i = cur.expect_u64("row index");
            const std::uint64_t j = cur.expect_u64("column index");
            const double v = cur.expect_double("entry value");
            if (i == 0 || i > m || j == 0 || j > n) cur.fail("entry index out of range", at);
            a(i - 1, j - 1) = v;
        }
    }
    const auto [at, tok] = cur.token();
    if (!tok.empty()) cur.fail("trailing content", at);
    return a;
}

// Coordinate files load with duplicate detection; explicit zeros are dropped
// (the writer never emits them, so round-trips are unaffected).
inline SparseColMatrix load_matrix_market_sparse(const std::string& path) {
    const std::string data = detail::read_file(path);
    detail::TextCursor cur(data, path);
    if (!detail::parse_banner(cur, data))
        cur.fail("expected a coordinate file for sparse loading", 0);
    const std::uint64_t m = cur.expect_u64("row count");
    const std::uint64_t n = cur.expect_u64("column count");
    const std::uint64_t nnz = cur.expect_u64("entry count");
    if (m == 0 || n == 0) cur.fail("zero dimension", cur.offset());
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(n);
    for (std::uint64_t t = 0; t < nnz; ++t) {
        const std::size_t at = cur.next_offset();
        const std::uint64_t i = cur.expect_u64("row index");
        const std::uint64_t j = cur.expect_u64("column index");
        const double v = cur.expect_double("entry value");
        if (i == 0 || i > m || j == 0 || j > n) cur.fail("entry index out of range", at);
        if (v != 0.0) cols[j - 1].emplace_back(i - 1, v);
    }
    const auto [at, tok] = cur.token();
    if (!tok.empty()) cur.fail("trailing content", at);
    for (std::size_t j = 0; j < n; ++j) {
        auto& col = cols[j];
        std::sort(col.begin(), col.end());
        for (std::size_t t = 1; t < col.size(); ++t)
            if (col[t].first == col[t - 1].first)
                throw ParseError(path + ": duplicate entry for row " +
                                     std::to_string(col[t].first + 1) + ", column " +
                                     std::to_string(j + 1),
                                 data.size());
    }
    return SparseColMatrix::from_columns(m, cols);
}

inline DenseMatrix load_matrix(const std::string& path, MatrixFormat format) {
    if (format == MatrixFormat::raw_f64) return load_raw_f64(path);
    return load_matrix_market_dense(path);
}

// Factorizations persist as three sibling files sharing a prefix: the dense
// dictionary, the sparse coefficients, and a JSON sidecar with everything
// else. JSON doubles print shortest-round-trip, so reload is bitwise exact.
inline void save_factorization(const Factorization& f, const std::string& prefix,
                               std::uint64_t seed) {
    save_raw_f64(f.d, prefix + ".d.rmap");
    save_matrix_market(f.v, prefix + ".v.mtx");
    nlohmann::json meta;
    meta["achieved_delta"] = f.achieved_delta;
    meta["column_residuals"] = f.column_residuals;
    meta["delta_d"] = f.delta_d;
    meta["seed"] = seed;
    meta["selected"] = f.selected;
    meta["zero_columns"] = f.zero_columns;
    detail::write_file(prefix + ".meta.json", meta.dump(2) + "\n");
}

inline Factorization load_factorization(const std::string& prefix) {
    Factorization f;
    f.d = load_raw_f64(prefix + ".d.rmap");
    f.v = load_matrix_market_sparse(prefix + ".v.mtx");
    if (f.d.cols() != f.v.rows())
        throw ParseError(prefix + ": dictionary atoms and coefficient rows disagree", 0);
    const std::string raw = detail::read_file(prefix + ".meta.json");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(prefix + ".meta.json: " + e.what(), e.byte);
    }
    try {
        f.achieved_delta = meta.at("achieved_delta").get<double>();
        f.delta_d = meta.at("delta_d").get<double>();
        f.selected = meta.at("selected").get<std::vector<std::size_t>>();
        f.column_residuals = meta.at("column_residuals").get<Vector>();
        f.zero_columns = meta.at("zero_columns").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(prefix + ".meta.json: " + e.what(), 0);
    }
    if (f.selected.size() != f.d.cols())
        throw ParseError(prefix + ".meta.json: selected size must match dictionary atoms", 0);
    return f;
}

// Deterministic report writer: nlohmann orders object keys alphabetically and
// prints doubles shortest-round-trip, so identical content gives identical
// bytes. Timing and timestamps belong in a separate sidecar, never here.
inline void save_report(const nlohmann::json& report, const std::string& path) {
    detail::write_file(path, report.dump(2) + "\n");
}

}  // namespace rankmap
