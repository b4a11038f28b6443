#pragma once

#include <iosfwd>

namespace scgc {

/// Entry point of the `scgc` tool. Subcommands: synth, pretrain, train,
/// eval, influence, sweep. Returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scgc
