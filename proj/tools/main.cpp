// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// dmltwin command-line tool.

#include "dmltwin/cli.hpp"

int main(int argc, char** argv) { return dmltwin::run_cli(argc, argv); }
