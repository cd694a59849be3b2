// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include "xpfn/cli/commands.hpp"

int main(int argc, char** argv) { return xpfn::cli::run_cli(argc, argv); }
