#ifndef JSCC_CLI_HPP_
#define JSCC_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace jscc {
namespace cli {

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 on success, 2 on configuration/usage errors, 3 on runtime errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace jscc

#endif  // JSCC_CLI_HPP_
