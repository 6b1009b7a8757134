#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pansharp/errors.hpp"
#include "pansharp/metrics.hpp"

using namespace pansharp;
using namespace pansharp::metrics;

namespace {

Raster fill(std::size_t w, std::size_t h, std::size_t bands, double v) {
  return Raster(w, h, std::vector<BandRole>(bands, BandRole::Unknown),
                std::vector<double>(w * h * bands, v));
}

void expect_rel(double got, double want, double tol = 1e-10) {
  EXPECT_LE(oracle::relative_error(got, want, 1e-300), tol) << got << " vs " << want;
}

}  // namespace

TEST(Rmse, ClosedFormsAndOracle) {
  const Raster r = oracle::random_raster(4, 4, {BandRole::Red, BandRole::Nir}, 1);
  EXPECT_EQ(rmse(r, r).mean, 0.0);
  Raster f = r;
  for (double& v : f.data()) v += 3.0;
  EXPECT_NEAR(rmse(f, r).mean, 3.0, 1e-12);
  const Raster g = oracle::random_raster(4, 4, {BandRole::Red, BandRole::Nir}, 2);
  EXPECT_NEAR(rmse(g, r).mean, oracle::rmse(g, r), 1e-12 * oracle::rmse(g, r));
  const auto per = rmse(g, r).per_band;
  ASSERT_EQ(per.size(), 2u);
  expect_rel(per[1], oracle::rmse_band(g.band(1), r.band(1)));
  EXPECT_THROW(rmse(g, fill(4, 5, 2, 1.0)), ShapeError);
}

TEST(Rmae, ClosedFormsAndOracle) {
  EXPECT_NEAR(rmae(fill(4, 4, 1, 101.0), fill(4, 4, 1, 100.0)).mean, 1.0, 1e-12);
  const Raster r = oracle::random_raster(9, 7, rgbn_roles(), 3, 10.0, 2000.0);
  EXPECT_EQ(rmae(r, r).mean, 0.0);
  const Raster f = oracle::random_raster(9, 7, rgbn_roles(), 4, 10.0, 2000.0);
  expect_rel(rmae(f, r).mean, oracle::rmae(f, r));
  EXPECT_THROW(rmae(f, fill(9, 7, 4, 0.0)), DegenerateInput);
}

TEST(Ergas, ClosedFormsAndOracle) {
  // single band with RMSE equal to its mean: ref = 1 everywhere, fused = 0 or 2
  Raster ref = fill(2, 2, 1, 1.0);
  Raster f(2, 2, {BandRole::Unknown}, std::vector<double>{0.0, 2.0, 2.0, 0.0});
  EXPECT_NEAR(ergas(f, ref, ScaleFactor(4)), 25.0, 1e-12);
  const Raster r = oracle::random_raster(16, 16, rgbn_roles(), 5, 1.0, 2047.0);
  EXPECT_EQ(ergas(r, r, ScaleFactor(4)), 0.0);
  const Raster g = oracle::random_raster(16, 16, rgbn_roles(), 6, 1.0, 2047.0);
  expect_rel(ergas(g, r, ScaleFactor(4)), oracle::ergas(g, r, 4));
}

TEST(Sam, ClosedForms) {
  const Raster a(1, 1, {BandRole::Red, BandRole::Green}, std::vector<double>{1.0, 0.0});
  const Raster b(1, 1, {BandRole::Red, BandRole::Green}, std::vector<double>{0.0, 1.0});
  EXPECT_NEAR(sam(a, b).degrees, 90.0, 1e-12);
  const Raster r = oracle::random_raster(8, 8, rgbn_roles(), 7, 1.0, 2047.0);
  EXPECT_EQ(sam(r, r).degrees, 0.0);
  Raster twice = r;
  for (double& v : twice.data()) v *= 2.0;
  EXPECT_EQ(sam(twice, r).degrees, 0.0);
  EXPECT_THROW(sam(fill(2, 2, 2, 0.0), fill(2, 2, 2, 0.0)), DegenerateInput);
  EXPECT_THROW(sam(fill(2, 2, 1, 1.0), fill(2, 2, 1, 1.0)), InvalidArgument);
}

TEST(Sam, OracleSkipsAndScaleInvariance) {
  Raster f = oracle::random_raster(8, 8, rgbn_roles(), 8, -50.0, 2047.0);
  const Raster r = oracle::random_raster(8, 8, rgbn_roles(), 9, -50.0, 2047.0);
  for (std::size_t b = 0; b < 4; ++b) f.at(b, 2, 3) = 0.0;
  const auto s = sam(f, r);
  EXPECT_EQ(s.skipped_pixels, 1u);
  EXPECT_EQ(s.valid_pixels, 63u);
  expect_rel(s.degrees, oracle::sam_degrees(f, r));
  Raster scaled = f;
  for (std::size_t i = 0; i < f.plane_size(); ++i) {
    const double k = 0.1 + static_cast<double>(i % 7);
    for (std::size_t b = 0; b < 4; ++b) scaled.band(b)[i] *= k;
  }
  EXPECT_NEAR(sam(scaled, r).degrees, s.degrees, 1e-10);
}

TEST(Uiqi, IdentitySymmetryAndOracle) {
  const Raster r = oracle::random_raster(16, 16, rgbn_roles(), 10);
  EXPECT_EQ(uiqi(r, r).mean, 1.0);
  const Raster f = oracle::random_raster(16, 16, rgbn_roles(), 11);
  expect_rel(uiqi(f, r).mean, oracle::uiqi(f, r));
  expect_rel(uiqi(r, f).mean, uiqi(f, r).mean);
  EXPECT_EQ(uiqi(f, r).per_band.size(), 4u);
  EXPECT_THROW(uiqi(fill(7, 16, 1, 1.0), fill(7, 16, 1, 1.0)), InvalidArgument);
}

TEST(Uiqi, PerfectAnticorrelationGivesMinusOne) {
  // ref = m + a[x % 8] * b[y % 8] with sum(a) = 0, so every 8x8 window has
  // mean m; its reflection 2m - ref is perfectly anticorrelated in every
  // window with equal means, which is the Q = -1 case.
  const double a[8] = {3, -1, 4, -1, -5, 9, -2, -7};
  const double bv[8] = {1, 2, 0.5, -1, 3, 1.5, -2, 0.25};
  const double m = 1000.0;
  Raster ref(16, 16, {BandRole::Pan});
  Raster refl(16, 16, {BandRole::Pan});
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      ref.at(0, y, x) = m + 10.0 * a[x % 8] * bv[y % 8];
      refl.at(0, y, x) = 2.0 * m - ref.at(0, y, x);
    }
  const auto q = uiqi(refl, ref);
  EXPECT_EQ(q.skipped_windows, 0u);
  EXPECT_NEAR(q.mean, -1.0, 1e-12);
  // Plain negation is not anticorrelation in this sense: Q(-x, x) = +1.
  Raster neg = ref;
  for (double& v : neg.data()) v = -v;
  EXPECT_NEAR(uiqi(neg, ref).mean, 1.0, 1e-12);
}

TEST(QIndex, ZeroDenominatorIsAbsent) {
  const std::vector<double> c(16, 5.0);
  EXPECT_FALSE(q_index(c, c).has_value());
  EXPECT_THROW(global_q(c, c), DegenerateInput);
  const auto x = oracle::random_vector(64, 12, 1.0, 2.0);
  EXPECT_EQ(*q_index(x, x), 1.0);
}

TEST(DLambda, CasesAndOracle) {
  const Raster lrms = oracle::random_raster(8, 8, rgbn_roles(), 13, 1.0, 2047.0);
  EXPECT_EQ(d_lambda(lrms, lrms), 0.0);
  const Raster f2 = oracle::random_raster(8, 8, {BandRole::Red, BandRole::Nir}, 14, 1.0, 2047.0);
  const Raster l2 = oracle::random_raster(8, 8, {BandRole::Red, BandRole::Nir}, 15, 1.0, 2047.0);
  const double gap = std::fabs(global_q(f2.band(0), f2.band(1)) - global_q(l2.band(0), l2.band(1)));
  EXPECT_NEAR(d_lambda(f2, l2), gap, 1e-15);
  const std::vector<BandRole> three{BandRole::Red, BandRole::Green, BandRole::Blue};
  const Raster f3 = oracle::random_raster(16, 16, three, 16, 1.0, 2047.0);
  const Raster l3 = oracle::random_raster(4, 4, three, 17, 1.0, 2047.0);
  expect_rel(d_lambda(f3, l3), oracle::d_lambda(f3, l3));
  EXPECT_THROW(d_lambda(fill(4, 4, 1, 1.0), fill(4, 4, 1, 1.0)), InvalidArgument);
}

TEST(DS, CasesAndOracle) {
  const Raster pan = oracle::random_raster(16, 16, {BandRole::Pan}, 18, 1.0, 2047.0);
  const Raster pan_low = oracle::resize(pan, 4, 4);
  Raster fused(16, 16, rgbn_roles());
  Raster lrms(4, 4, rgbn_roles());
  for (std::size_t b = 0; b < 4; ++b) {
    std::copy(pan.data().begin(), pan.data().end(), fused.band(b).begin());
    std::copy(pan_low.data().begin(), pan_low.data().end(), lrms.band(b).begin());
  }
  EXPECT_NEAR(d_s(fused, lrms, pan, ScaleFactor(4)), 0.0, 1e-15);

  const Raster f1 = oracle::random_raster(16, 16, {BandRole::Nir}, 19, 1.0, 2047.0);
  const Raster l1 = oracle::random_raster(4, 4, {BandRole::Nir}, 20, 1.0, 2047.0);
  const double gap =
      std::fabs(global_q(f1.band(0), pan.band(0)) - global_q(l1.band(0), pan_low.band(0)));
  EXPECT_NEAR(d_s(f1, l1, pan, ScaleFactor(4)), gap, 1e-12);

  const Raster f = oracle::random_raster(16, 16, rgbn_roles(), 21, 1.0, 2047.0);
  const Raster l = oracle::random_raster(4, 4, rgbn_roles(), 22, 1.0, 2047.0);
  expect_rel(d_s(f, l, pan, ScaleFactor(4)), oracle::d_s(f, l, pan, pan_low));
  EXPECT_THROW(d_s(f, l, pan, ScaleFactor(2)), ShapeError);
}

TEST(Qnr, Values) {
  EXPECT_EQ(qnr(0.0, 0.0), 1.0);
  EXPECT_EQ(qnr(1.0, 0.3), 0.0);
  EXPECT_NEAR(qnr(0.0163, 0.0698), 0.9150, 1e-3);
  EXPECT_NEAR(qnr(0.0163, 0.0698), (1 - 0.0163) * (1 - 0.0698), 1e-15);
}

TEST(EvaluateAll, BestValueVectorOnPerfectFusion) {
  const Raster ref = oracle::random_raster(16, 16, rgbn_roles(), 23, 1.0, 2047.0);
  const Raster pan = oracle::random_raster(16, 16, {BandRole::Pan}, 24, 1.0, 2047.0);
  // lrms = ref makes the inter-band Q matrices identical; pan = its own
  // band-mean and lrms at the same scale keeps D_S at zero.
  const Raster lrms = ref;
  Raster pan_same(16, 16, {BandRole::Pan});
  (void)pan;
  for (std::size_t i = 0; i < ref.plane_size(); ++i) pan_same.data()[i] = ref.band(0)[i];
  const auto r = evaluate_all({ref, &ref, lrms, pan_same, ScaleFactor(1)});
  EXPECT_EQ(r.protocol, Protocol::Reduced);
  EXPECT_EQ(*r.ergas, 0.0);
  EXPECT_EQ(*r.rmse, 0.0);
  EXPECT_EQ(*r.rmae, 0.0);
  EXPECT_EQ(*r.sam_degrees, 0.0);
  EXPECT_EQ(*r.uiqi, 1.0);
  EXPECT_EQ(r.d_lambda, 0.0);
  EXPECT_EQ(r.d_s, 0.0);
  EXPECT_EQ(r.qnr, 1.0);
}

TEST(EvaluateAll, FullProtocolAndConsistency) {
  const Raster f = oracle::random_raster(16, 16, rgbn_roles(), 25, 1.0, 2047.0);
  const Raster ref = oracle::random_raster(16, 16, rgbn_roles(), 26, 1.0, 2047.0);
  const Raster l = oracle::random_raster(4, 4, rgbn_roles(), 27, 1.0, 2047.0);
  const Raster pan = oracle::random_raster(16, 16, {BandRole::Pan}, 28, 1.0, 2047.0);
  const auto full = evaluate_all({f, nullptr, l, pan, ScaleFactor(4)});
  EXPECT_EQ(full.protocol, Protocol::Full);
  EXPECT_FALSE(full.ergas || full.rmse || full.rmae || full.sam_degrees || full.uiqi);
  EXPECT_NEAR(full.qnr, (1 - full.d_lambda) * (1 - full.d_s), 1e-12);
  const auto red = evaluate_all({f, &ref, l, pan, ScaleFactor(4)});
  EXPECT_TRUE(red.ergas && red.rmse && red.rmae && red.sam_degrees && red.uiqi);
  EXPECT_NEAR(red.qnr, (1 - red.d_lambda) * (1 - red.d_s), 1e-12);
  EXPECT_GE(*red.uiqi, -1.0);
  EXPECT_LE(*red.uiqi, 1.0);
  EXPECT_GE(*red.sam_degrees, 0.0);
}
