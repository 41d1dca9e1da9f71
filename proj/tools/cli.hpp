#pragma once

namespace microdepth_cli {

// Builds the CLI11 app (synth/extract/train/eval/ablate/bench) and runs the
// selected subcommand. Throws microdepth exceptions; main() maps them to the
// exit-code contract (0 ok, 1 user/config, 2 data, 3 internal).
int run(int argc, char** argv);

} // namespace microdepth_cli
