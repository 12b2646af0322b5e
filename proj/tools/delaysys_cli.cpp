// delaysys: simulate, analyze and verify delay integro-differential systems.

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "delaysys/delay_solver.hpp"
#include "delaysys/errors.hpp"
#include "delaysys/resolvent.hpp"
#include "delaysys/spec_io.hpp"
#include "delaysys/spectral.hpp"
#include "delaysys/verification.hpp"

namespace {

using namespace delaysys;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kSpecInvalid = 2;
constexpr int kNumerical = 3;

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return text;
}

int report_error(int code, const std::string& kind, const std::string& message,
                 const std::string& field = {}) {
  std::cerr << "error code=" << code << " kind=" << kind;
  if (!field.empty()) std::cerr << " field=" << one_line(field);
  std::cerr << " message=\"" << one_line(message) << "\"\n";
  return code;
}

struct Options {
  std::string spec;
  std::vector<std::string> specs;
  double step = 1e-3;
  double horizon = 10.0;
  std::string region;
  double tol = 1e-10;
  int grid = 32;
  std::string method = "mild";
  std::string out;
};

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path);
  if (!file) throw SpecError("out", "cannot open " + path + " for writing");
  write(file);
}

int run_simulate(const Options& o) {
  const SystemSpec spec = load_spec(o.spec);
  const SolveReport rep = o.method == "direct" ? solve_direct_oracle(spec, o.step, o.horizon)
                                               : solve_mild(spec, o.step, o.horizon);
  emit(o.out, [&](std::ostream& out) { write_trace_csv(out, rep); });
  return kOk;
}

int run_spectrum(const Options& o) {
  Rectangle rect{};
  try {
    rect = parse_rectangle(o.region);
  } catch (const DomainError& e) {
    return report_error(kUsage, "usage", e.what());
  }
  const SystemSpec spec = load_spec(o.spec);
  const CharacteristicFunction cf(spec.A, spec.kernel, spec.L);
  const SpectrumReport rep = find_roots(cf, rect, o.grid, o.tol);
  for (const std::string& w : rep.warnings) std::cerr << "warning: " << one_line(w) << "\n";
  emit(o.out, [&](std::ostream& out) { write_roots_csv(out, rep); });
  if (!rep.failures.empty()) {
    return report_error(kNumerical, "numerical", rep.failures.front());
  }
  return kOk;
}

int run_resolvent(const Options& o) {
  const SystemSpec spec = load_spec(o.spec);
  const ResolventFamily fam = compute_resolvent(spec.A, spec.kernel, o.step, o.horizon);
  emit(o.out, [&](std::ostream& out) { write_resolvent_csv(out, fam); });
  return kOk;
}

int run_info(const Options& o) {
  const SystemSpec spec = load_spec(o.spec);
  emit(o.out, [&](std::ostream& out) { describe_spec(out, spec); });
  return kOk;
}

int run_verify(const Options& o) {
  bool all = true;
  std::cout << "criterion results\n";
  for (const CriterionResult& r : run_suite(&std::cout)) all = all && r.passed;
  for (const std::string& path : o.specs) {
    CriterionResult r{0, "spec " + path, false, "", 0.0};
    try {
      const SystemSpec spec = load_spec(path);
      const double gap = cross_validate(spec, o.step, o.horizon);
      r.passed = gap <= 1e-3;
      r.detail = "cross_validate=" + std::to_string(gap);
    } catch (const std::exception& e) {
      r.detail = one_line(e.what());
    }
    std::cout << format_result(r) << "\n";
    all = all && r.passed;
  }
  std::cout << (all ? "all checks passed" : "some checks failed") << std::endl;
  return all ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay integro-differential systems: simulation, spectra, verification"};
  app.require_subcommand(1);
  Options o;

  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--spec", o.spec, "JSON system spec")->required()->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output path (default stdout)");
  };
  auto positive = CLI::PositiveNumber;

  CLI::App* simulate = app.add_subcommand("simulate", "solve the system, CSV trace");
  add_spec(simulate);
  simulate->add_option("--step", o.step, "time step h")->check(positive)->capture_default_str();
  simulate->add_option("--horizon", o.horizon, "final time T")->check(positive)->capture_default_str();
  simulate->add_option("--method", o.method, "mild or direct")
      ->check(CLI::IsMember({"mild", "direct"}))
      ->capture_default_str();
  add_out(simulate);

  CLI::App* spectrum = app.add_subcommand("spectrum", "characteristic roots, CSV");
  add_spec(spectrum);
  spectrum->add_option("--region", o.region, "re_min,re_max,im_min,im_max")->required();
  spectrum->add_option("--grid", o.grid, "cells per side")->check(CLI::Range(8, 4096))->capture_default_str();
  spectrum->add_option("--tol", o.tol, "Newton tolerance")->check(positive)->capture_default_str();
  add_out(spectrum);

  CLI::App* resolvent = app.add_subcommand("resolvent", "resolvent family, CSV");
  add_spec(resolvent);
  resolvent->add_option("--step", o.step, "time step h")->check(positive)->capture_default_str();
  resolvent->add_option("--horizon", o.horizon, "final time T")->check(positive)->capture_default_str();
  add_out(resolvent);

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--spec", o.specs, "specs to cross-validate as well")->check(CLI::ExistingFile);
  verify->add_option("--step", o.step, "step for spec cross-validation")->check(positive)->capture_default_str();
  verify->add_option("--horizon", o.horizon, "horizon for spec cross-validation")
      ->check(positive)
      ->default_val(2.0);

  CLI::App* info = app.add_subcommand("info", "spec summary");
  add_spec(info);
  add_out(info);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(kUsage, "usage", e.what());
  }

  try {
    if (*simulate) return run_simulate(o);
    if (*spectrum) return run_spectrum(o);
    if (*resolvent) return run_resolvent(o);
    if (*verify) return run_verify(o);
    if (*info) return run_info(o);
  } catch (const SpecError& e) {
    return report_error(kSpecInvalid, "spec", e.what(), e.field());
  } catch (const Error& e) {
    return report_error(kNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return report_error(kNumerical, "internal", e.what());
  }
  return kUsage;
}
