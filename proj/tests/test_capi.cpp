#include <nqd/nqd.h>

#include <gtest/gtest.h>

#include <cmath>
#include <string>

namespace {

std::string data(const char* name) { return std::string(NQD_TEST_DATA) + "/" + name; }

}  // namespace

TEST(CApi, VersionAndCommands) {
  EXPECT_GT(std::string(nqd_version()).size(), 0u);
  ASSERT_EQ(nqd_command_count(), 9u);
  EXPECT_STREQ(nqd_command_name(0), "verify");
  EXPECT_EQ(nqd_command_name(99), nullptr);
}

TEST(CApi, DomainLifecycle) {
  nqd_domain* d = nullptr;
  ASSERT_EQ(nqd_domain_from_json(R"({"dim":2,"shape":{"kind":"Ball","center":[0,0],"radius":1}})", &d), NQD_OK);
  int n = 0;
  EXPECT_EQ(nqd_domain_dim(d, &n), NQD_OK);
  EXPECT_EQ(n, 2);
  const double in[2] = {0.5, 0.0}, out[2] = {2.0, 0.0};
  int c = -1;
  EXPECT_EQ(nqd_domain_contains(d, in, 2, &c), NQD_OK);
  EXPECT_EQ(c, 1);
  EXPECT_EQ(nqd_domain_contains(d, out, 2, &c), NQD_OK);
  EXPECT_EQ(c, 0);
  EXPECT_EQ(nqd_domain_contains(d, in, 3, &c), NQD_E_DIMENSION);
  const char* js = nullptr;
  EXPECT_EQ(nqd_domain_to_json(d, &js), NQD_OK);
  EXPECT_NE(std::string(js).find("Ball"), std::string::npos);
  nqd_domain_free(d);
  nqd_domain_free(nullptr);
}

TEST(CApi, ParseErrors) {
  nqd_domain* d = nullptr;
  EXPECT_EQ(nqd_domain_from_file(data("malformed.json").c_str(), &d), NQD_E_PARSE);
  EXPECT_EQ(d, nullptr);
  EXPECT_GT(std::string(nqd_last_error()).size(), 0u);
  EXPECT_EQ(nqd_domain_from_file(data("bad_semiaxis.json").c_str(), &d), NQD_E_PARSE);
  EXPECT_NE(std::string(nqd_last_error()).find("semiAxes[1]"), std::string::npos);
  EXPECT_EQ(nqd_domain_from_file(data("missing.json").c_str(), &d), NQD_E_IO);
  EXPECT_EQ(nqd_domain_from_json(nullptr, &d), NQD_E_INVALID_ARGUMENT);
}

TEST(CApi, PotentialValues) {
  nqd_domain* d = nullptr;
  ASSERT_EQ(nqd_domain_from_file(data("ball3.json").c_str(), &d), NQD_OK);
  const double x[3] = {0, 0, 0};
  double v = 0.0, g[3] = {1, 1, 1};
  ASSERT_EQ(nqd_v2(d, x, 3, 1e-8, &v, g), NQD_OK);
  EXPECT_NEAR(v, 0.5, 1e-8);
  for (double gi : g) EXPECT_NEAR(gi, 0.0, 1e-8);
  EXPECT_EQ(nqd_v2(d, x, 3, 1e-8, &v, nullptr), NQD_OK);
  EXPECT_EQ(nqd_v2(d, x, 3, -1.0, &v, nullptr), NQD_E_INVALID_ARGUMENT);
  nqd_domain_free(d);
  EXPECT_DOUBLE_EQ(nqd_ball_constant(2), 0.25);
  const double y[2] = {std::exp(1.0), 0.0};
  double k = 0.0;
  EXPECT_EQ(nqd_newton_kernel(2, y, &k), NQD_OK);
  EXPECT_NEAR(k, -1.0 / (2 * M_PI), 1e-15);
  const double zero[2] = {0, 0};
  EXPECT_EQ(nqd_newton_kernel(2, zero, &k), NQD_E_SINGULAR);
}

TEST(CApi, VerifyAndRun) {
  nqd_domain* d = nullptr;
  ASSERT_EQ(nqd_domain_from_file(data("ellipse_exterior.json").c_str(), &d), NQD_OK);
  int is_null = 0;
  double res = 1.0;
  ASSERT_EQ(nqd_verify_null_qd(d, 1e-6, &is_null, &res), NQD_OK);
  EXPECT_EQ(is_null, 1);
  EXPECT_LE(res, 1e-5);

  nqd_options opt;
  nqd_options_init(&opt);
  EXPECT_DOUBLE_EQ(opt.tol, 1e-6);
  nqd_report* r = nullptr;
  ASSERT_EQ(nqd_run("schwarz", d, &opt, &r), NQD_OK);
  const char* text = nullptr;
  ASSERT_EQ(nqd_report_render(r, NQD_FORMAT_CSV, &text), NQD_OK);
  EXPECT_NE(std::string(text).find("P.A,0,0,-0.25"), std::string::npos);
  ASSERT_EQ(nqd_report_render(r, NQD_FORMAT_JSON, &text), NQD_OK);
  EXPECT_EQ(text[0], '{');
  nqd_report_free(r);

  ASSERT_EQ(nqd_run("verify", d, &opt, &r), NQD_OK);
  EXPECT_EQ(nqd_report_verdict(r), 1);
  nqd_report_free(r);
  EXPECT_EQ(nqd_run("bogus", d, &opt, &r), NQD_E_INVALID_ARGUMENT);
  EXPECT_EQ(nqd_run("verify", nullptr, &opt, &r), NQD_E_INVALID_ARGUMENT);
  nqd_domain_free(d);

  ASSERT_EQ(nqd_domain_from_file(data("square_exterior.json").c_str(), &d), NQD_OK);
  ASSERT_EQ(nqd_run("verify", d, &opt, &r), NQD_OK);
  EXPECT_EQ(nqd_report_verdict(r), 0);
  nqd_report_free(r);
  EXPECT_EQ(nqd_verify_null_qd(d, 1e-6, &is_null, &res), NQD_OK);
  EXPECT_EQ(is_null, 0);
  nqd_domain_free(d);
}
