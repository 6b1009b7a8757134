#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/raster.hpp"
#include "pansharp/raster_io.hpp"
#include "pansharp/resample.hpp"

using namespace pansharp;

namespace {

Raster constant(std::size_t w, std::size_t h, std::size_t bands, double v) {
  std::vector<BandRole> roles(bands, BandRole::Unknown);
  return Raster(w, h, roles, std::vector<double>(w * h * bands, v));
}

double max_abs_diff(const Raster& a, const Raster& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace

TEST(Resample, ConstantStaysConstant) {
  const Raster c = constant(13, 9, 2, 7.0);
  for (auto [w, h] : {std::pair{26, 18}, {5, 3}, {13, 9}, {40, 7}}) {
    const Raster r = bicubic_resample(c, w, h);
    for (double v : r.data()) ASSERT_EQ(v, 7.0);
  }
}

TEST(Resample, IdentityIsBitwise) {
  const Raster r = oracle::random_raster(17, 11, rgbn_roles(), 1);
  EXPECT_EQ(bicubic_resample(r, 17, 11), r);
}

TEST(Resample, LinearRampReproducedInInterior) {
  Raster ramp(8, 8, {BandRole::Pan});
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) ramp.at(0, y, x) = static_cast<double>(x);
  const Raster up = bicubic_resample(ramp, 16, 16);
  // Taps reach two source pixels on each side; clamping only matters when
  // a tap falls outside [0, 7].
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 4; x < 12; ++x) {
      const double src_x = (x + 0.5) * 0.5 - 0.5;
      EXPECT_NEAR(up.at(0, y, x), src_x, 1e-12) << "x=" << x;
    }
  }
}

TEST(Resample, CheckerboardDownsampleMatchesOracle) {
  Raster cb(16, 16, {BandRole::Pan});
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) cb.at(0, y, x) = ((x + y) % 2) ? 2047.0 : 0.0;
  const Raster got = downsample(cb, ScaleFactor(2));
  const Raster want = oracle::resize(cb, 8, 8);
  EXPECT_LE(max_abs_diff(got, want), 1e-10);
}

TEST(Resample, RandomResizesMatchOracle) {
  const Raster r = oracle::random_raster(19, 23, rgbn_roles(), 2);
  for (auto [w, h] : {std::pair{38, 46}, {7, 5}, {19, 40}, {64, 9}}) {
    EXPECT_LE(max_abs_diff(bicubic_resample(r, w, h), oracle::resize(r, w, h)), 1e-9);
  }
}

TEST(Resample, IsLinear) {
  const Raster x = oracle::random_raster(12, 12, {BandRole::Pan}, 3);
  const Raster y = oracle::random_raster(12, 12, {BandRole::Pan}, 4);
  const double a = 0.37, b = -1.9;
  Raster comb = x;
  for (std::size_t i = 0; i < comb.data().size(); ++i)
    comb.data()[i] = a * x.data()[i] + b * y.data()[i];
  const Raster rc = bicubic_resample(comb, 29, 17);
  const Raster rx = bicubic_resample(x, 29, 17);
  const Raster ry = bicubic_resample(y, 29, 17);
  for (std::size_t i = 0; i < rc.data().size(); ++i) {
    EXPECT_NEAR(rc.data()[i], a * rx.data()[i] + b * ry.data()[i], 1e-10);
  }
}

TEST(Resample, ZeroTargetRejected) {
  const Raster r = constant(4, 4, 1, 1.0);
  EXPECT_THROW(bicubic_resample(r, 0, 4), InvalidArgument);
  EXPECT_THROW(bicubic_resample(r, 4, 0), InvalidArgument);
}

TEST(Downsample, Geometry) {
  const Raster pan = constant(256, 256, 1, 3.0);
  const Raster d = downsample(pan, ScaleFactor(4));
  EXPECT_EQ(d.width(), 64u);
  EXPECT_EQ(d.height(), 64u);
  for (double v : d.data()) ASSERT_EQ(v, 3.0);
  EXPECT_THROW(downsample(constant(10, 8, 1, 0.0), ScaleFactor(4)), InvalidArgument);
}

TEST(Highpass, ConstantGivesZero) {
  const Raster p = constant(32, 32, 1, 812.5);
  for (double v : highpass(p, ScaleFactor(4)).data()) ASSERT_EQ(v, 0.0);
}

TEST(Highpass, ReconstructsInput) {
  const Raster p = oracle::random_raster(32, 32, {BandRole::Pan}, 5);
  const Raster hp = highpass(p, ScaleFactor(2));
  const Raster lp = lowpass(p, ScaleFactor(2));
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    EXPECT_NEAR(hp.data()[i] + lp.data()[i], p.data()[i], 1e-12 * 2047.0);
  }
}

TEST(Highpass, MatchesComposedOracle) {
  const Raster p = oracle::random_raster(32, 32, {BandRole::Pan}, 6);
  const Raster low = oracle::resize(oracle::resize(p, 16, 16), 32, 32);
  const Raster hp = highpass(p, ScaleFactor(2));
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    EXPECT_NEAR(hp.data()[i], p.data()[i] - low.data()[i], 1e-9);
  }
}

TEST(Highpass, MultiBandRejected) {
  EXPECT_THROW(highpass(constant(8, 8, 2, 1.0), ScaleFactor(2)), InvalidArgument);
}

TEST(Wald, Geometry) {
  const Raster hrms = oracle::random_raster(256, 256, rgbn_roles(), 7);
  const Raster pan = oracle::random_raster(256, 256, {BandRole::Pan}, 8);
  const auto d = wald_degrade(hrms, pan, ScaleFactor(4));
  EXPECT_EQ(d.lrms.width(), 64u);
  EXPECT_EQ(d.lrms.height(), 64u);
  EXPECT_EQ(d.lrms.bands(), 4u);
  EXPECT_EQ(d.pan, pan);
  // per-band consistency with the oracle
  EXPECT_LE(max_abs_diff(d.lrms, oracle::resize(hrms, 64, 64)), 1e-9);
}

TEST(Wald, UnitScaleIsIdentity) {
  const Raster hrms = oracle::random_raster(16, 16, rgbn_roles(), 9);
  const Raster pan = oracle::random_raster(16, 16, {BandRole::Pan}, 10);
  EXPECT_EQ(wald_degrade(hrms, pan, ScaleFactor(1)).lrms, hrms);
}

TEST(Wald, MismatchRejected) {
  const Raster hrms = constant(16, 16, 4, 1.0);
  const Raster pan = constant(32, 32, 1, 1.0);
  EXPECT_THROW(wald_degrade(hrms, pan, ScaleFactor(2)), InvalidArgument);
}

TEST(Crop, PatchCounts) {
  auto count = [](std::size_t size) {
    const Raster hrms = constant(size, size, 4, 1.0);
    const Raster pan = constant(size, size, 1, 1.0);
    return crop_patches(hrms, pan, ScaleFactor(4)).size();
  };
  EXPECT_EQ(count(512), 4u);
  EXPECT_EQ(count(256), 1u);
  EXPECT_EQ(count(300), 1u);
  EXPECT_EQ(count(200), 0u);
}

TEST(Crop, GridEnumerationOracle) {
  const Raster hrms = oracle::random_raster(300, 200, rgbn_roles(), 11);
  const Raster pan = oracle::random_raster(300, 200, {BandRole::Pan}, 12);
  CropOptions opt;
  opt.patch = 64;
  opt.stride = 48;
  opt.source_id = "t";
  const auto set = crop_patches(hrms, pan, ScaleFactor(4), opt);
  std::vector<std::pair<std::size_t, std::size_t>> expect;
  for (std::size_t y = 0; y + 64 <= 200; y += 48)
    for (std::size_t x = 0; x + 64 <= 300; x += 48) expect.emplace_back(y, x);
  ASSERT_EQ(set.size(), expect.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(set[i].origin.y, expect[i].first);
    EXPECT_EQ(set[i].origin.x, expect[i].second);
    EXPECT_EQ(set[i].origin.source_id, "t");
    EXPECT_EQ(set[i].hrms.width(), 64u);
    EXPECT_EQ(set[i].pan.width(), 64u);
    EXPECT_EQ(set[i].lrms.width(), 16u);
    EXPECT_EQ(set[i].lrms.height(), 16u);
    EXPECT_EQ(set[i].hrms.at(2, 5, 7), hrms.at(2, expect[i].first + 5, expect[i].second + 7));
  }
}

TEST(Mbr1, RoundTripIsBitwise) {
  Raster r = oracle::random_raster(7, 5, rgbn_roles(), 13, -100.0, 3000.0);
  r.data()[3] = -0.0;
  r.data()[4] = 5e-324;
  const Raster back = decode_mbr1(encode_mbr1(r));
  ASSERT_EQ(back.width(), r.width());
  ASSERT_EQ(back.roles(), r.roles());
  EXPECT_EQ(back.range(), r.range());
  EXPECT_EQ(std::memcmp(back.data().data(), r.data().data(), r.data().size() * 8), 0);

  const auto dir = oracle::scratch_dir("mbr1");
  write_raster(r, dir / "r.mbr");
  EXPECT_EQ(read_file_bytes(dir / "r.mbr"), encode_mbr1(r));
  EXPECT_EQ(encode_mbr1(read_raster(dir / "r.mbr")), encode_mbr1(r));
}

TEST(Mbr1, SinglePixelIs41Bytes) {
  const Raster one(1, 1, {BandRole::Pan}, std::vector<double>{42.0});
  const auto bytes = encode_mbr1(one);
  EXPECT_EQ(bytes.size(), 41u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MBR1");
  EXPECT_EQ(bytes[16], 4);  // PAN role code
}

TEST(Mbr1, FormatErrorsCarryOffsets) {
  const Raster r = oracle::random_raster(3, 2, {BandRole::Red, BandRole::Nir}, 14);
  auto bytes = encode_mbr1(r);

  auto offset_of = [](std::vector<std::uint8_t> b) -> std::int64_t {
    try {
      decode_mbr1(b);
    } catch (const FormatError& e) {
      return static_cast<std::int64_t>(e.offset());
    }
    return -1;
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(offset_of(bad_magic), 0);

  auto bad_role = bytes;
  bad_role[17] = 9;
  EXPECT_EQ(offset_of(bad_role), 17);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_EQ(offset_of(truncated), 4 + 12 + 2 + 16);

  auto short_header = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10);
  EXPECT_GE(offset_of(short_header), 4);

  // Width 0xFFFFFFFF x height 0xFFFFFFFF x bands 0xFFFFFFFF overflows.
  auto huge = bytes;
  for (int i = 4; i < 16; ++i) huge[i] = 0xFF;
  EXPECT_EQ(offset_of(huge), 4);
}

TEST(Pnm, EndpointsQuantize) {
  Raster r(2, 1, {BandRole::Pan}, std::vector<double>{0.0, 2047.0});
  const auto pgm = encode_pnm(r);
  const std::string header = "P5\n2 1\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 2);
  EXPECT_EQ(std::string(pgm.begin(), pgm.begin() + header.size()), header);
  EXPECT_EQ(pgm[header.size()], 0);
  EXPECT_EQ(pgm[header.size() + 1], 255);
  EXPECT_EQ(quantize(5000.0, ValueRange{}, 255), 255);
  EXPECT_EQ(quantize(-3.0, ValueRange{}, 255), 0);
}

TEST(Pnm, LabelPgmRoundTrip) {
  GrayImage g;
  g.width = 3;
  g.height = 2;
  g.maxval = 4;
  g.pixels = {0, 1, 2, 3, 4, 0};
  const GrayImage back = decode_pgm(encode_pgm(g));
  EXPECT_EQ(back.pixels, g.pixels);
  EXPECT_EQ(back.maxval, 4);
}
