#ifndef CLAB_CLI_HPP
#define CLAB_CLI_HPP

namespace clab {

// Batch entry point behind the `clab` binary. Exit codes: 0 success,
// 1 usage or IO error, 2 verification failure.
int run_cli(int argc, const char* const* argv);

}  // namespace clab

#endif
