#include <catch_amalgamated.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "rankmap/cssd.hpp"
#include "rankmap/io.hpp"
#include "rankmap/rng.hpp"

using namespace rankmap;

namespace {

bool bitwise_equal(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t t = 0; t < a.data().size(); ++t)
        if (std::bit_cast<std::uint64_t>(a.data()[t]) !=
            std::bit_cast<std::uint64_t>(b.data()[t]))
            return false;
    return true;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t t = 0; t < a.size(); ++t)
        if (std::bit_cast<std::uint64_t>(a[t]) != std::bit_cast<std::uint64_t>(b[t]))
            return false;
    return true;
}

bool bitwise_equal(const SparseColMatrix& a, const SparseColMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.col_ptr() == b.col_ptr() &&
           a.row_idx() == b.row_idx() && bitwise_equal(a.values(), b.values());
}

DenseMatrix awkward_matrix() {
    // Values chosen to stress text round-trips: non-terminating binary
    // fractions, signed zero, extreme magnitudes, and a subnormal.
    DenseMatrix a(7, 3);
    Rng rng(42);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 7; ++i) a(i, j) = rng.gaussian();
    a(0, 0) = 0.1;
    a(1, 0) = 1.0 / 3.0;
    a(2, 0) = -0.0;
    a(3, 1) = 1e308;
    a(4, 1) = 4.9406564584124654e-324;
    a(5, 2) = -2.5000000000000002e-10;
    return a;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    REQUIRE(f.good());
}

}  // namespace

TEST_CASE("raw format round-trips bitwise") {
    const DenseMatrix a = awkward_matrix();
    const std::string path = "io_raw_roundtrip.rmap";
    save_raw_f64(a, path);

    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 16 + 7 * 3 * 8);
    CHECK(bytes.substr(0, 4) == "RMAP");
    CHECK(static_cast<unsigned char>(bytes[4]) == 7);   // rows, little-endian u32
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);   // cols
    CHECK(bytes.substr(12, 4) == std::string(4, '\0')); // reserved

    const DenseMatrix back = load_raw_f64(path);
    CHECK(bitwise_equal(a, back));
    CHECK(bitwise_equal(load_matrix(path, MatrixFormat::raw_f64), a));
    std::remove(path.c_str());
}

TEST_CASE("raw format loader reports the failing byte") {
    const DenseMatrix a = awkward_matrix();
    const std::string path = "io_raw_corrupt.rmap";
    save_raw_f64(a, path);
    const std::string good = slurp(path);

    SECTION("truncated payload") {
        spit(path, good.substr(0, good.size() - 5));
        try {
            load_raw_f64(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == good.size() - 5);
        }
    }
    SECTION("truncated header") {
        spit(path, good.substr(0, 9));
        try {
            load_raw_f64(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == 9);
        }
    }
    SECTION("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        spit(path, bad);
        try {
            load_raw_f64(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == 0);
        }
    }
    SECTION("trailing bytes") {
        spit(path, good + "junk");
        try {
            load_raw_f64(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == good.size());
        }
    }
    SECTION("missing file") {
        std::remove(path.c_str());
        try {
            load_raw_f64(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == 0);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("raw format rejects oversized dimensions") {
    DenseMatrix a(1, 1);
    a(0, 0) = 1.0;
    // The header stores u32 dimensions; building a matrix that large is not
    // feasible here, so only the loader-side zero-dimension guard is checked.
    const std::string path = "io_raw_zero.rmap";
    std::string bytes = "RMAP";
    bytes += std::string(4, '\0');          // rows = 0
    bytes += std::string(1, '\x01') + std::string(3, '\0');
    bytes += std::string(4, '\0');
    spit(path, bytes);
    CHECK_THROWS_AS(load_raw_f64(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("matrix market array files parse and round-trip") {
    SECTION("hand-written identity fixture") {
        const std::string path = "io_mm_identity.mtx";
        spit(path,
             "%%MatrixMarket matrix array real general\n"
             "% comment line\n"
             "2 2\n"
             "1.0\n0.0\n0.0\n1.0\n");
        const DenseMatrix a = load_matrix_market_dense(path);
        REQUIRE(a.rows() == 2);
        REQUIRE(a.cols() == 2);
        CHECK(a(0, 0) == 1.0);
        CHECK(a(1, 0) == 0.0);
        CHECK(a(0, 1) == 0.0);
        CHECK(a(1, 1) == 1.0);
        CHECK(bitwise_equal(load_matrix(path, MatrixFormat::matrix_market), a));
        std::remove(path.c_str());
    }
    SECTION("writer output reloads bitwise") {
        const DenseMatrix a = awkward_matrix();
        const std::string path = "io_mm_dense.mtx";
        save_matrix_market(a, path);
        CHECK(bitwise_equal(load_matrix_market_dense(path), a));
        std::remove(path.c_str());
    }
}

TEST_CASE("matrix market coordinate files parse and round-trip") {
    const std::string path = "io_mm_sparse.mtx";

    SECTION("writer output reloads bitwise") {
        std::vector<std::vector<std::pair<std::size_t, double>>> cols(4);
        cols[0] = {{0, 0.1}, {3, -1.0 / 3.0}};
        cols[2] = {{1, 1e-300}, {2, 7.25}};
        cols[3] = {{4, -0.5}};
        const SparseColMatrix v = SparseColMatrix::from_columns(5, cols);
        save_matrix_market(v, path);
        const SparseColMatrix back = load_matrix_market_sparse(path);
        CHECK(bitwise_equal(v, back));

        // The same file loads densely too.
        const DenseMatrix dense = load_matrix_market_dense(path);
        CHECK(bitwise_equal(dense, v.densify()));
    }
    SECTION("explicit zeros are dropped") {
        spit(path,
             "%%MatrixMarket matrix coordinate real general\n"
             "3 3 3\n"
             "1 1 2.0\n"
             "2 2 0.0\n"
             "3 3 4.0\n");
        const SparseColMatrix v = load_matrix_market_sparse(path);
        CHECK(v.nnz() == 2);
        CHECK(v.densify()(0, 0) == 2.0);
        CHECK(v.densify()(2, 2) == 4.0);
    }
    SECTION("duplicate entries are rejected") {
        spit(path,
             "%%MatrixMarket matrix coordinate real general\n"
             "3 3 2\n"
             "2 1 1.0\n"
             "2 1 5.0\n");
        CHECK_THROWS_AS(load_matrix_market_sparse(path), ParseError);
    }
    SECTION("out-of-range index reports its offset") {
        const std::string text =
            "%%MatrixMarket matrix coordinate real general\n"
            "3 3 2\n"
            "1 1 1.0\n"
            "4 1 5.0\n";
        spit(path, text);
        try {
            load_matrix_market_sparse(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == text.find("4 1"));
        }
    }
    SECTION("malformed token reports its offset") {
        const std::string text =
            "%%MatrixMarket matrix coordinate real general\n"
            "3 3 1\n"
            "1 1 abc\n";
        spit(path, text);
        try {
            load_matrix_market_sparse(path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.byte_offset == text.find("abc"));
        }
    }
    SECTION("trailing content is rejected") {
        spit(path,
             "%%MatrixMarket matrix coordinate real general\n"
             "3 3 1\n"
             "1 1 1.0\n"
             "2 2 9.0\n");
        CHECK_THROWS_AS(load_matrix_market_sparse(path), ParseError);
    }
    SECTION("banner must be a real general matrix") {
        spit(path, "%%MatrixMarket matrix coordinate complex general\n1 1 0\n");
        CHECK_THROWS_AS(load_matrix_market_sparse(path), ParseError);
        spit(path, "not a matrix market file\n");
        CHECK_THROWS_AS(load_matrix_market_sparse(path), ParseError);
        spit(path, "%%MatrixMarket matrix array real general\n1 1\n1.0\n");
        CHECK_THROWS_AS(load_matrix_market_sparse(path), ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("factorizations persist and reload exactly") {
    Rng rng(7);
    DenseMatrix a(12, 30);
    for (std::size_t j = 0; j < 30; ++j) {
        const std::size_t pick = rng.index(3);
        for (std::size_t i = 0; i < 12; ++i)
            a(i, j) = std::sin(double(i + 1) * double(pick + 1)) * (1.0 + 0.01 * double(j));
    }
    CssdConfig cfg;
    cfg.delta_d = 0.05;
    cfg.seed = 11;
    CostContext ctx;
    const Factorization f = decompose(a, cfg, ctx);
    REQUIRE(f.l() > 0);

    const std::string prefix = "io_fact";
    save_factorization(f, prefix, cfg.seed);
    const Factorization back = load_factorization(prefix);

    CHECK(bitwise_equal(back.d, f.d));
    CHECK(bitwise_equal(back.v, f.v));
    CHECK(back.selected == f.selected);
    CHECK(back.zero_columns == f.zero_columns);
    CHECK(bitwise_equal(back.column_residuals, f.column_residuals));
    CHECK(std::bit_cast<std::uint64_t>(back.delta_d) == std::bit_cast<std::uint64_t>(f.delta_d));
    CHECK(std::bit_cast<std::uint64_t>(back.achieved_delta) ==
          std::bit_cast<std::uint64_t>(f.achieved_delta));

    SECTION("mismatched sidecar is rejected") {
        const std::string meta = slurp(prefix + ".meta.json");
        auto j = nlohmann::json::parse(meta);
        j["selected"].erase(0);
        spit(prefix + ".meta.json", j.dump(2) + "\n");
        CHECK_THROWS_AS(load_factorization(prefix), ParseError);
    }
    std::remove((prefix + ".d.rmap").c_str());
    std::remove((prefix + ".v.mtx").c_str());
    std::remove((prefix + ".meta.json").c_str());
}

TEST_CASE("report writer is deterministic") {
    nlohmann::json r;
    r["zeta"] = 1.0 / 3.0;
    r["alpha"] = {1, 2, 3};
    r["mid"]["nested"] = 0.1;

    save_report(r, "io_report_a.json");
    save_report(r, "io_report_b.json");
    const std::string a = slurp("io_report_a.json");
    const std::string b = slurp("io_report_b.json");
    CHECK(a == b);
    // Alphabetical key order makes the byte layout independent of insertion
    // order.
    CHECK(a.find("\"alpha\"") < a.find("\"mid\""));
    CHECK(a.find("\"mid\"") < a.find("\"zeta\""));
    CHECK(nlohmann::json::parse(a)["zeta"].get<double>() == 1.0 / 3.0);
    std::remove("io_report_a.json");
    std::remove("io_report_b.json");
}
