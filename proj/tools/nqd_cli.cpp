// nqd: command-line front end over the C API.
#include "nqd/nqd.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string domain;
  double tol = 0.0;
  std::vector<double> radii, rho, direction;
  double grid_h = 0.0, box = 0.0, omega = 0.0;
  long long seed = -1;
  int count = -1, axis = -1, jmax = -1;
  long samples = -1;
  std::string format = "json";
  std::string out;
  std::string series;
  bool expect_null = false;
  bool no_closed_forms = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--domain", f.domain, "domain spec JSON file")->check(CLI::ExistingFile);
  sub->add_option("--tol", f.tol, "tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--radii", f.radii, "comma-separated radii")->delimiter(',');
  sub->add_option("--rho", f.rho, "comma-separated scales")->delimiter(',');
  sub->add_option("--grid-h", f.grid_h, "grid spacing")->check(CLI::PositiveNumber);
  sub->add_option("--box", f.box, "half width of the computational box")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "random seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", f.out, "output path (stdout when omitted)");
  sub->add_flag("--expect-null", f.expect_null, "exit 1 when the result is negative");
  sub->add_option("--count", f.count, "number of test functions or sample points")->check(CLI::NonNegativeNumber);
  sub->add_option("--samples", f.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  sub->add_option("--axis", f.axis, "coordinate axis (0-based)")->check(CLI::NonNegativeNumber);
  sub->add_option("--jmax", f.jmax, "largest dyadic index")->check(CLI::NonNegativeNumber);
  sub->add_option("--omega", f.omega, "SOR relaxation in [1, 2)");
  sub->add_option("--direction", f.direction, "comma-separated direction")->delimiter(',');
  sub->add_option("--series", f.series, "blowup series")->check(CLI::IsMember({"decay", "dyadic", "rescale", "balayage"}));
  sub->add_flag("--no-closed-forms", f.no_closed_forms, "evaluate potentials by cubature only");
}

int fail(const std::string& msg) {
  std::cerr << "nqd: " << msg << '\n';
  return kExitUsage;
}

int execute(const std::string& command, const Flags& f) {
  nqd_domain* dom = nullptr;
  if (!f.domain.empty()) {
    if (nqd_domain_from_file(f.domain.c_str(), &dom) != NQD_OK) return fail(f.domain + ": " + nqd_last_error());
  }
  nqd_options opt;
  nqd_options_init(&opt);
  if (f.tol > 0.0) opt.tol = f.tol;
  opt.radii = f.radii.data();
  opt.n_radii = f.radii.size();
  opt.rho = f.rho.data();
  opt.n_rho = f.rho.size();
  opt.direction = f.direction.data();
  opt.n_direction = f.direction.size();
  if (f.grid_h > 0.0) opt.grid_h = f.grid_h;
  if (f.box > 0.0) opt.box = f.box;
  if (f.omega > 0.0) opt.omega = f.omega;
  if (f.seed >= 0) opt.seed = static_cast<uint64_t>(f.seed);
  if (f.count >= 0) opt.count = f.count;
  if (f.samples > 0) opt.samples = f.samples;
  if (f.axis >= 0) opt.axis = f.axis;
  if (f.jmax >= 0) opt.jmax = f.jmax;
  if (!f.series.empty()) opt.series = f.series.c_str();
  opt.closed_forms = f.no_closed_forms ? 0 : 1;

  nqd_report* rep = nullptr;
  const nqd_status st = nqd_run(command.c_str(), dom, &opt, &rep);
  nqd_domain_free(dom);
  if (st != NQD_OK) return fail(command + ": " + nqd_last_error());
  const char* text = nullptr;
  if (nqd_report_render(rep, f.format == "csv" ? NQD_FORMAT_CSV : NQD_FORMAT_JSON, &text) != NQD_OK) {
    nqd_report_free(rep);
    return fail(nqd_last_error());
  }
  if (f.out.empty() || f.out == "-") {
    std::fputs(text, stdout);
    std::fflush(stdout);
  } else {
    std::ofstream os(f.out, std::ios::binary);
    os << text;
    if (!os.good()) {
      nqd_report_free(rep);
      return fail("cannot write " + f.out);
    }
  }
  const int verdict = nqd_report_verdict(rep);
  nqd_report_free(rep);
  return f.expect_null && verdict == 0 ? kExitNegative : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Null quadrature domain toolkit"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  const char* help[] = {
      "fit the Schwarz potential of the complement and classify the domain",
      "sample the potential of the domain's indicator",
      "print the Schwarz quadratic of the domain",
      "quadrature and null identity residuals",
      "ACF monotonicity functional of the Schwarz potential",
      "blow-up series: decay, dyadic, rescale, balayage",
      "Lebesgue density of the domain in balls",
      "solve the discrete obstacle problem with Schwarz boundary data",
      "logarithmic term of a cone potential",
  };
  for (size_t i = 0; i < nqd_command_count(); ++i) {
    const std::string name = nqd_command_name(i);
    CLI::App* sub = app.add_subcommand(name, help[i]);
    add_flags(sub, flags);
    subs.emplace_back(name, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) return execute(name, flags);
  return kExitUsage;
}
