#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/core/serialize.hpp"
#include "mtgcd/core/tensor.hpp"

using namespace mtgcd;

TEST_CASE("rng: same seed gives the same stream") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: fork does not consume state and is salt-dependent") {
    Rng a(77);
    Rng b(77);
    Rng f1 = a.fork(1);
    Rng f2 = a.fork(2);
    // forking must leave the parent stream untouched
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(f1.next_u64() != f2.next_u64());
    // fork is a pure function of (seed, salt)
    Rng g1 = Rng(77).fork(1);
    g1.next_u64();
    CHECK(f1.next_u64() == g1.next_u64());
}

TEST_CASE("rng: uniform_int covers both ends inclusively") {
    Rng r(5);
    bool lo = false, hi = false;
    for (int i = 0; i < 2000; ++i) {
        const int v = r.uniform_int(3, 7);
        CHECK(v >= 3);
        CHECK(v <= 7);
        lo = lo || v == 3;
        hi = hi || v == 7;
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("f32 blobs round-trip exactly") {
    const std::filesystem::path p = std::filesystem::temp_directory_path() / "mtgcd_f32_test.bin";
    std::vector<float> vals{0.0f, -1.5f, 3.25e-40f, 1.0e30f, -0.0f, 123456.78f};
    io::write_f32(p, vals.data(), vals.size());
    const std::vector<float> back = io::read_f32(p);
    REQUIRE(back.size() == vals.size());
    for (size_t i = 0; i < vals.size(); ++i) {
        CHECK(std::memcmp(&back[i], &vals[i], sizeof(float)) == 0);
    }
    std::filesystem::remove(p);
}

TEST_CASE("tensor: row-major 4d layout") {
    Tensor<float> t({2, 3, 4, 5});
    CHECK(t.numel() == 120);
    t.at4(1, 2, 3, 4) = 9.0f;
    CHECK(t[119] == 9.0f);
    t.at4(0, 0, 0, 1) = 5.0f;
    CHECK(t[1] == 5.0f);
    CHECK_THROWS_AS(Tensor<float>({2, -1}), ConfigError);
}
