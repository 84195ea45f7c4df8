// Acceptance gate: runs every criterion at full scale by default and prints
// one pass/fail line per criterion.  Exit 0 when all pass, 3 otherwise.

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "prodnet/verify.hpp"

int main(int argc, char** argv) {
  prodnet::VerifyOptions opt;
  opt.full = true;
  const char* ledger_path = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--fast") == 0) opt.full = false;
    else if (std::strcmp(argv[i], "--full") == 0) opt.full = true;
    else if (std::strcmp(argv[i], "--mutate-lambda2") == 0 && i + 1 < argc)
      opt.lambda2_bias = std::atof(argv[++i]);
    else if (std::strcmp(argv[i], "--ledger") == 0 && i + 1 < argc)
      ledger_path = argv[++i];
    else {
      std::cerr << "usage: acceptance [--fast|--full] [--mutate-lambda2 X] [--ledger PATH]\n";
      return 2;
    }
  }
  const prodnet::VerifySummary sum = prodnet::run_acceptance(opt);
  prodnet::print_pass_fail(sum, std::cout);
  if (ledger_path) {
    std::FILE* f = std::fopen(ledger_path, "wb");
    if (!f) {
      std::cerr << "cannot write ledger " << ledger_path << "\n";
      return 2;
    }
    const std::string csv = prodnet::ledger_csv(sum);
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  }
  return sum.all_pass ? 0 : 3;
}
