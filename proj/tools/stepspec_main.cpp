// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "stepspec/cli/cli.hpp"

int main(int argc, char** argv) {
  return stepspec::cli::run_cli(argc, argv, std::cout, std::cerr);
}
