// srb: train, evaluate, generate, gradient-check and build toy corpora
// for the semantic-relevance seq2seq model.
//
// Usage: srb <train|eval|generate|gradcheck|make-toy> [--config=FILE]
//            [--key=value ...]
//
// Any config key can be given as a --key=value flag; flags override the
// file. Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
// failure.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "srb/config.hpp"
#include "srb/errors.hpp"
#include "srb/train.hpp"

namespace {

constexpr const char* kUsage =
    "usage: srb <command> [--config=FILE] [--key=value ...]\n"
    "\n"
    "commands:\n"
    "  train      train a model (needs train_file; dev_file optional)\n"
    "  eval       decode test_file and score ROUGE-1/2/L and BLEU\n"
    "  generate   decode input_file line by line into output_file\n"
    "  gradcheck  finite-difference check of the full loss gradients\n"
    "  make-toy   write a synthetic corpus (toy_task, toy_size)\n"
    "\n"
    "config: plain 'key = value' lines; any key may be overridden with\n"
    "--key=value (flags win). See README.md for the key list.\n";

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << kUsage;
    return args.empty() ? 1 : 0;
  }

  const std::string command = args[0];
  std::string config_path;
  std::vector<std::string> overrides;
  for (size_t i = 1; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg == "--help" || arg == "-h") {
      std::cout << kUsage;
      return 0;
    }
    if (arg.rfind("--config=", 0) == 0) {
      config_path = arg.substr(9);
    } else if (arg.rfind("--", 0) == 0) {
      overrides.push_back(arg.substr(2));
    } else {
      std::cerr << "error: unexpected argument '" << arg << "'\n" << kUsage;
      return 1;
    }
  }

  try {
    const srb::RunConfig config = srb::make_config(config_path, overrides);
    if (command == "train") {
      srb::cmd_train(config, std::cout);
    } else if (command == "eval") {
      srb::cmd_eval(config, std::cout);
    } else if (command == "generate") {
      srb::cmd_generate(config, std::cout);
    } else if (command == "gradcheck") {
      srb::cmd_gradcheck(config, std::cout);
    } else if (command == "make-toy") {
      srb::cmd_make_toy(config, std::cout);
    } else {
      std::cerr << "error: unknown command '" << command << "'\n" << kUsage;
      return 1;
    }
  } catch (const srb::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const srb::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const srb::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
