#include "delaysys/spec_io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "delaysys/errors.hpp"
#include "delaysys/spectral.hpp"

namespace delaysys {
namespace {

using nlohmann::json;

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw SpecError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(field, "non-finite number");
  return v;
}

Eigen::Index count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw SpecError(field, "expected a nonnegative integer");
  }
  return static_cast<Eigen::Index>(j.get<long long>());
}

Vector vector_of(const json& j, const std::string& field, Eigen::Index size) {
  if (!j.is_array()) throw SpecError(field, "expected an array");
  if (static_cast<Eigen::Index>(j.size()) != size) {
    std::ostringstream msg;
    msg << "expected length " << size << ", got " << j.size();
    throw SpecError(field, msg.str());
  }
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = number(j[static_cast<std::size_t>(i)], field);
  }
  return v;
}

Matrix matrix_of(const json& j, const std::string& field, Eigen::Index rows,
                 Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    std::ostringstream msg;
    msg << "expected " << rows << " x " << cols << " matrix (row-major)";
    throw SpecError(field, msg.str());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = vector_of(j[static_cast<std::size_t>(i)], field, cols).transpose();
  }
  return m;
}

void only_keys(const json& j, const std::string& field,
               std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw SpecError(field, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw SpecError(field.empty() ? item.key() : field + "." + item.key(),
                      "unknown key");
    }
  }
}

const json& required(const json& j, const std::string& key,
                     const std::string& field) {
  auto it = j.find(key);
  if (it == j.end()) throw SpecError(field, "missing key \"" + key + "\"");
  return *it;
}

Kernel kernel_of(const json& j) {
  if (j.is_null()) return Kernel();
  if (!j.is_array()) throw SpecError("kernel", "expected an array of terms");
  std::vector<KernelTerm> terms;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string field = "kernel[" + std::to_string(k) + "]";
    const json& t = j[k];
    only_keys(t, field, {"c", "m", "sigma", "omega", "phase"});
    KernelTerm term;
    term.coefficient = number(required(t, "c", field), field + ".c");
    term.power = t.contains("m") ? static_cast<int>(count(t["m"], field + ".m")) : 0;
    term.rate = number(required(t, "sigma", field), field + ".sigma");
    term.frequency = t.contains("omega") ? number(t["omega"], field + ".omega") : 0.0;
    if (t.contains("phase")) {
      const json& p = t["phase"];
      if (p == "cos") {
        term.phase = Phase::kCos;
      } else if (p == "sin") {
        term.phase = Phase::kSin;
      } else {
        throw SpecError(field + ".phase", "expected \"cos\" or \"sin\"");
      }
    }
    terms.push_back(term);
  }
  try {
    return Kernel(std::move(terms));
  } catch (const Error& e) {
    throw SpecError("kernel", e.what());
  }
}

DelayMeasure measure_of(const json& j, const std::string& field,
                        std::optional<double> horizon, Eigen::Index rows,
                        Eigen::Index cols) {
  only_keys(j, field, {"r", "atoms", "density"});
  double r = 0.0;
  if (j.contains("r")) {
    r = number(j["r"], field + ".r");
    if (horizon && std::abs(r - *horizon) > 1e-12 * std::max(1.0, *horizon)) {
      throw SpecError(field + ".r", "horizon differs from the top-level r");
    }
  } else if (horizon) {
    r = *horizon;
  } else {
    throw SpecError(field, "missing key \"r\"");
  }
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const json& a = j["atoms"];
    if (!a.is_array()) throw SpecError(field + ".atoms", "expected an array");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::string f = field + ".atoms[" + std::to_string(k) + "]";
      only_keys(a[k], f, {"theta", "M"});
      atoms.push_back(Atom{number(required(a[k], "theta", f), f + ".theta"),
                           matrix_of(required(a[k], "M", f), f + ".M", rows, cols)});
    }
  }
  std::vector<DensityPiece> pieces;
  if (j.contains("density")) {
    const json& p = j["density"];
    if (!p.is_array()) throw SpecError(field + ".density", "expected an array");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const std::string f = field + ".density[" + std::to_string(k) + "]";
      only_keys(p[k], f, {"a", "b", "coeffs"});
      DensityPiece piece;
      piece.lower = number(required(p[k], "a", f), f + ".a");
      piece.upper = number(required(p[k], "b", f), f + ".b");
      const json& c = required(p[k], "coeffs", f);
      if (!c.is_array()) throw SpecError(f + ".coeffs", "expected an array of matrices");
      for (std::size_t i = 0; i < c.size(); ++i) {
        piece.coeffs.push_back(matrix_of(c[i], f + ".coeffs", rows, cols));
      }
      pieces.push_back(std::move(piece));
    }
  }
  try {
    return DelayMeasure(r, rows, cols, std::move(atoms), std::move(pieces));
  } catch (const Error& e) {
    throw SpecError(field, e.what());
  }
}

Trajectory trajectory_of(const json& j, const std::string& field,
                         Eigen::Index dim, std::optional<double> horizon) {
  if (j.is_object() && j.contains("constant")) {
    only_keys(j, field, {"constant"});
    if (!horizon) throw SpecError(field, "constant form needs r");
    const Vector v = vector_of(j["constant"], field + ".constant", dim);
    return Trajectory::constant(-*horizon, *horizon, 2, v);
  }
  only_keys(j, field, {"start", "step", "samples"});
  const double start = number(required(j, "start", field), field + ".start");
  const double step = number(required(j, "step", field), field + ".step");
  if (!(step > 0.0)) throw SpecError(field + ".step", "must be positive");
  const json& s = required(j, "samples", field);
  if (!s.is_array() || s.empty()) throw SpecError(field + ".samples", "expected a nonempty array");
  std::vector<Vector> samples;
  samples.reserve(s.size());
  for (const auto& v : s) samples.push_back(vector_of(v, field + ".samples", dim));
  try {
    return Trajectory(start, step, std::move(samples));
  } catch (const Error& e) {
    throw SpecError(field, e.what());
  }
}

std::string line_info(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

SystemSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    auto pos = what.find(": ", what.find("parse error"));
    throw SpecError("json", line_info(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                                (pos == std::string::npos ? what : what.substr(pos + 2)));
  }
  only_keys(j, "", {"d", "m", "q", "A", "kernel", "L", "K", "C", "D", "r", "x0",
                    "phi", "u", "f", "notes"});
  const Eigen::Index d = count(required(j, "d", "d"), "d");
  if (d < 1) throw SpecError("d", "must be at least 1");
  const Eigen::Index m = j.contains("m") ? count(j["m"], "m") : 0;
  const Eigen::Index q = j.contains("q") ? count(j["q"], "q") : 0;
  std::optional<double> r;
  if (j.contains("r")) {
    r = number(j["r"], "r");
    if (!(*r > 0.0)) throw SpecError("r", "must be positive");
  }

  SystemSpec spec{matrix_of(required(j, "A", "A"), "A", d, d),
                  kernel_of(j.value("kernel", json())),
                  measure_of(required(j, "L", "L"), "L", r, d, d),
                  vector_of(required(j, "x0", "x0"), "x0", d),
                  Trajectory(0.0, 1.0, {Vector::Zero(d)}),
                  std::nullopt, std::nullopt, std::nullopt, std::nullopt,
                  std::nullopt, m, q, j.value("notes", std::string())};
  r = spec.L.horizon();
  spec.phi = trajectory_of(required(j, "phi", "phi"), "phi", d, r);
  if (j.contains("K") && !j["K"].is_null()) spec.K = measure_of(j["K"], "K", r, d, m);
  if (j.contains("C") && !j["C"].is_null()) spec.C = measure_of(j["C"], "C", r, q, d);
  if (j.contains("D") && !j["D"].is_null()) spec.D = measure_of(j["D"], "D", r, q, m);
  if (j.contains("u") && !j["u"].is_null()) spec.u = trajectory_of(j["u"], "u", m, r);
  if (j.contains("f") && !j["f"].is_null()) spec.f = trajectory_of(j["f"], "f", d, r);
  spec.validate();
  return spec;
}

SystemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("spec", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

namespace {

void describe_measure(std::ostream& out, const char* name,
                      const std::optional<DelayMeasure>& mu) {
  out << name << ": ";
  if (!mu) {
    out << "absent\n";
    return;
  }
  out << mu->out_dim() << "x" << mu->in_dim() << ", " << mu->atoms().size()
      << " atoms at {";
  for (std::size_t k = 0; k < mu->atoms().size(); ++k) {
    out << (k ? ", " : "") << mu->atoms()[k].theta;
  }
  out << "}, " << mu->density().size() << " density pieces, |mu|([-r,0]) = "
      << total_variation(*mu, mu->horizon()) << "\n";
}

}  // namespace

void describe_spec(std::ostream& out, const SystemSpec& spec) {
  out << "d = " << spec.state_dim() << ", m = " << spec.input_dim
      << ", q = " << spec.output_dim << ", r = " << spec.horizon() << "\n";
  out << "kernel: " << spec.kernel.terms().size() << " terms";
  if (!spec.kernel.is_zero()) out << ", max rate " << spec.kernel.max_rate();
  out << "\n";
  const auto poles = spec.kernel.poles();
  out << "kernel poles:";
  if (poles.empty()) out << " none";
  for (const Complex& p : poles) out << " (" << p.real() << "," << p.imag() << ")";
  out << "\n";
  describe_measure(out, "L", spec.L);
  describe_measure(out, "K", spec.K);
  describe_measure(out, "C", spec.C);
  describe_measure(out, "D", spec.D);
  out << "u: " << (spec.u ? "given" : "zero") << ", f: " << (spec.f ? "given" : "zero")
      << "\n";
  if (!spec.notes.empty()) out << "notes: " << spec.notes << "\n";
}

}  // namespace delaysys
