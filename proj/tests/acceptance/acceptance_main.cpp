// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Exit status 0 only if all pass.
#include <iostream>

#include "signalmarket/cli/app.hpp"

int main(int argc, char** argv) {
  signalmarket::validate::AcceptanceOptions o;
  if (argc > 1) o.only = argv[1];
  o.cli = [](const std::vector<std::string>& a, std::ostream& out, std::ostream& err) {
    return signalmarket::cli::run_cli(a, out, err);
  };
  const auto results = signalmarket::validate::run_acceptance(o, &std::cerr);
  std::cout << signalmarket::validate::format_report(results);
  const bool ok = signalmarket::validate::all_passed(results);
  std::cout << (ok ? "all criteria passed" : "some criteria FAILED") << '\n';
  return ok ? 0 : 1;
}
