#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace delaysys {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

CriterionResult check_resolvent_closed_form();      // 1
CriterionResult check_semigroup_reduction();        // 2
CriterionResult check_method_of_steps();            // 3
CriterionResult check_two_scheme_agreement();       // 4
CriterionResult check_characteristic_root();        // 5
CriterionResult check_factorization_identity();     // 6
CriterionResult check_admissibility();              // 7
CriterionResult check_composition();                // 8
CriterionResult check_yosida();                     // 9
CriterionResult check_degenerate_cases();           // 10
CriterionResult check_stability_coupling();         // 11

struct NamedCheck {
  int id;
  const char* name;
  std::function<CriterionResult()> run;
};

const std::vector<NamedCheck>& verification_suite();

/// Runs every check in order; each line is printed as soon as it finishes.
std::vector<CriterionResult> run_suite(std::ostream* progress);

std::string format_result(const CriterionResult& result);

/// e^{M} by scaling and squaring of a degree-18 Taylor polynomial.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& m);

}  // namespace delaysys
