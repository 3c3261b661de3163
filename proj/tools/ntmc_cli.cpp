// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "ntmc/cli.hpp"

int main(int argc, char** argv) { return ntmc::run_cli(argc, argv, std::cout, std::cerr); }
