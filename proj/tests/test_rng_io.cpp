#include <doctest.h>

#include "fedtrial/errors.hpp"
#include "fedtrial/io.hpp"
#include "fedtrial/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

using namespace fedtrial;

TEST_CASE("derive_seed is deterministic and order-sensitive") {
    const auto a = derive_seed({1, 2, 3});
    const auto b = derive_seed({1, 2, 3});
    CHECK(a == b);
    CHECK(derive_seed({1, 2, 3}) != derive_seed({3, 2, 1}));
    CHECK(derive_seed({1}) != derive_seed({1, 0}));
    CHECK(derive_seed({seed_tag::kSplit, 7}) != derive_seed({seed_tag::kRound, 7}));
}

TEST_CASE("rng streams are reproducible per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff_from_c = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        all_equal = all_equal && x == b.next_u64();
        any_diff_from_c = any_diff_from_c || x != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff_from_c);
}

TEST_CASE("unit draws land in [0,1) and fill the range") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("bounded draws are unbiased enough and in range") {
    Rng rng(11);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) {
        const auto v = rng.bounded(5);
        REQUIRE(v < 5);
        ++counts[static_cast<std::size_t>(v)];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("shuffle is a permutation and seed-deterministic") {
    std::vector<int> v(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
    auto w = v;
    Rng r1(5), r2(5);
    r1.shuffle(v);
    r2.shuffle(w);
    CHECK(v == w);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);

    std::vector<int> u(100);
    for (int i = 0; i < 100; ++i) u[static_cast<std::size_t>(i)] = i;
    Rng r3(6);
    r3.shuffle(u);
    CHECK(u != v);
}

TEST_CASE("format_double round-trips exactly and uses '.'") {
    const double cases[] = {0.0,  1.0,     -1.0,          0.1,    1.0 / 3.0,
                            1e-9, 9867.25, 0.69314718056, 1e300, -2.5e-8};
    for (double v : cases) {
        const std::string s = io::format_double(v);
        CHECK(s.find(',') == std::string::npos);
        CHECK(std::stod(s) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(1.0) == "1");
}

TEST_CASE("git blob sha1 matches known git hashes") {
    // `git hash-object` of an empty file and of "hello\n".
    CHECK(io::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(io::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("file round trip and hash-of-file") {
    const auto dir = std::filesystem::temp_directory_path() / "fedtrial_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "blob.txt";
    const std::string content = "line1\nline2\n";
    io::write_file(path, content);
    CHECK(io::read_file(path) == content);
    CHECK(io::git_blob_sha1_file(path) == io::git_blob_sha1(content));
    const auto lines = io::read_lines(path);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "line1");
    CHECK(lines[1] == "line2");
    std::filesystem::remove_all(dir);
}

TEST_CASE("reading a missing file raises IoError") {
    CHECK_THROWS_AS((void)io::read_file("/nonexistent/fedtrial/file.txt"), IoError);
}
