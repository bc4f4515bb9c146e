#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "olabuf/persist.hpp"
#include "support.hpp"

using namespace olabuf;

namespace {

std::filesystem::path temp_file(const std::string &name) {
  return std::filesystem::temp_directory_path() /
         ("olabuf_persist_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST(Persist, HeaderLayout) {
  const VirtualSineArray a(1000);
  const OlaBuffer buf = compute_buffer(a, 10, 4);
  const auto bytes = encode_ola_buffer(buf);
  ASSERT_EQ(bytes.size(), ola_header_bytes + 101 * 8);
  EXPECT_EQ(std::memcmp(bytes.data(), "OLAB", 4), 0);
  const unsigned char version[4] = {1, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, version, 4), 0);
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data() + 8, 8);
  EXPECT_EQ(n, 1000U);
  std::uint64_t b = 0;
  std::memcpy(&b, bytes.data() + 16, 8);
  EXPECT_EQ(b, 10U);
  std::uint32_t moments = 0;
  std::uint32_t beta = 0;
  std::memcpy(&moments, bytes.data() + 24, 4);
  std::memcpy(&beta, bytes.data() + 28, 4);
  EXPECT_EQ(moments, 4U);
  EXPECT_EQ(beta, 2U);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 32, 8);
  EXPECT_EQ(first, buf.components()[0]);
}

TEST(Persist, RoundTripBitIdentical) {
  SplitMix64 rng(1);
  const auto path = temp_file("rt.olab");
  for (int trial = 0; trial < 20; ++trial) {
    const int moments = 2 * static_cast<int>(rng.between(1, 4));
    const index_t b = rng.between(2, 20);
    const MemoryArray a = olabuf::testing::random_array(rng, moments * b + rng.between(0, 3000));
    const OlaBuffer buf = compute_buffer(a, b, moments);
    write_ola_buffer(path, buf);
    const OlaBuffer back = read_ola_buffer(path);
    ASSERT_EQ(back.components().size(), buf.components().size());
    EXPECT_EQ(std::memcmp(back.components().data(), buf.components().data(),
                          buf.components().size() * sizeof(double)),
              0);
    EXPECT_EQ(back.beta(), buf.beta());
    const auto [p, q] = sample_range(rng, a.size());
    const RangePolynomial f(p, q, olabuf::testing::random_coeffs(rng, moments - 1));
    const double x = ola_query(a, buf, f);
    const double y = ola_query(a, back, f);
    EXPECT_EQ(std::memcmp(&x, &y, sizeof x), 0);
  }
  std::filesystem::remove(path);
}

TEST(Persist, RejectsCorruptFiles) {
  const VirtualSineArray a(500);
  auto bytes = encode_ola_buffer(compute_buffer(a, 5, 2));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_ola_buffer(bad_magic), io_error);

  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_THROW(decode_ola_buffer(bad_version), io_error);

  auto odd_moments = bytes;
  odd_moments[24] = 3;
  EXPECT_THROW(decode_ola_buffer(odd_moments), io_error);

  auto bad_beta = bytes;
  bad_beta[28] = 7;
  EXPECT_THROW(decode_ola_buffer(bad_beta), io_error);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_ola_buffer(truncated), io_error);

  auto extended = bytes;
  extended.push_back(0);
  EXPECT_THROW(decode_ola_buffer(extended), io_error);

  EXPECT_THROW(decode_ola_buffer(std::vector<unsigned char>(10, 0)), io_error);
  EXPECT_THROW(read_ola_buffer(temp_file("absent.olab")), io_error);
}
