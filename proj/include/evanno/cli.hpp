#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "evanno/oracle.hpp"

namespace evanno {

struct CliHooks {
  // Replaces the configured provider transport (tests).
  std::shared_ptr<Transport> transport;
};

// Runs the pipeline command line. Returns 0 on success, 2 on usage errors and
// 1 when a pipeline step fails (diagnostic on err).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks = {});
int run_cli(int argc, char** argv);

}  // namespace evanno
