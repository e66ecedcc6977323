#include <gtest/gtest.h>

#include "support.hpp"

using namespace isle;

namespace {

Bytes pgm_bytes(const std::string& header, const std::vector<std::uint8_t>& body) {
  Bytes out = to_bytes(header);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

TEST(Pgm, ReadsEightBit) {
  const auto img = read_pgm(pgm_bytes("P5\n3 2\n255\n", {0, 1, 2, 3, 4, 255}));
  EXPECT_EQ(img.width, 3u);
  EXPECT_EQ(img.height, 2u);
  EXPECT_EQ(img.bit_depth, 8);
  EXPECT_EQ(img.at(2, 1), 255);
  EXPECT_EQ(img.at(0, 1), 3);
}

TEST(Pgm, ReadsSixteenBitBigEndian) {
  const auto img = read_pgm(pgm_bytes("P5 2 1 65535\n", {0x01, 0x02, 0xff, 0xfe}));
  EXPECT_EQ(img.bit_depth, 16);
  EXPECT_EQ(img.at(0, 0), 0x0102);
  EXPECT_EQ(img.at(1, 0), 0xfffe);
}

TEST(Pgm, SkipsComments) {
  const auto img = read_pgm(pgm_bytes("P5\n# made by hand\n2 1 # dims\n255\n", {7, 9}));
  EXPECT_EQ(img.at(1, 0), 9);
}

TEST(Pgm, RejectsTruncatedPixelData) {
  EXPECT_THROW(read_pgm(pgm_bytes("P5\n3 2\n255\n", {0, 1, 2})), Error);
}

TEST(Pgm, RejectsOtherFormats) {
  EXPECT_THROW(read_pgm(to_bytes("P2\n1 1\n255\n0\n")), Error);
  EXPECT_THROW(read_pgm(to_bytes("")), Error);
  EXPECT_THROW(read_pgm(pgm_bytes("P5\n0 1\n255\n", {})), Error);
  EXPECT_THROW(read_pgm(pgm_bytes("P5\n1 1\n0\n", {0})), Error);
}

TEST(Pgm, RejectsSamplesAboveMaxval) {
  try {
    read_pgm(pgm_bytes("P5\n2 1\n100\n", {5, 101}));
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
}

TEST(Pgm, RoundTripsRandomImages) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto w = static_cast<std::uint32_t>(1 + rng.uniform() * 64);
    const auto h = static_cast<std::uint32_t>(1 + rng.uniform() * 64);
    const auto img = test::random_image(rng, w, h, i % 2 ? 16 : 8);
    EXPECT_EQ(read_pgm(write_pgm(img)), img);
  }
}

TEST(AssetId, Charset) {
  EXPECT_TRUE(is_valid_asset_id("scan_01.a-b"));
  EXPECT_FALSE(is_valid_asset_id(""));
  EXPECT_FALSE(is_valid_asset_id("a/b"));
  EXPECT_FALSE(is_valid_asset_id("a b"));
}

TEST(Labels, ParsesAndRoundTrips) {
  const auto table = read_labels_csv(to_bytes("asset_id,effusion,nodule\nimg1,1,0\nimg2,0,1\n"));
  ASSERT_EQ(table.label_names.size(), 2u);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.find("img2")->values[1], 1);
  EXPECT_EQ(table.find("img3"), nullptr);
  const auto again = read_labels_csv(to_bytes(write_labels_csv(table)));
  EXPECT_EQ(again.label_names, table.label_names);
  EXPECT_EQ(again.rows.size(), 2u);
  EXPECT_EQ(again.rows[0].values, table.rows[0].values);
}

TEST(Labels, RejectsMalformedRows) {
  EXPECT_THROW(read_labels_csv(to_bytes("asset_id,a\nimg1,1,0\n")), Error);
  EXPECT_THROW(read_labels_csv(to_bytes("asset_id,a\nimg1,2\n")), Error);
  EXPECT_THROW(read_labels_csv(to_bytes("asset_id,a\nimg1,1\nimg1,0\n")), Error);
  EXPECT_THROW(read_labels_csv(to_bytes("id,a\nimg1,1\n")), Error);
}

TEST(Files, AtomicWriteThenRead) {
  test::TempDir dir("isle-image");
  const auto path = dir / "x.bin";
  write_file_atomic(path, to_bytes("hello"));
  EXPECT_EQ(read_file(path), to_bytes("hello"));
  try {
    read_file(dir / "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}
