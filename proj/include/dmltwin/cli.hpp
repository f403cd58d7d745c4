// Copyright (c) 2026, The dmltwin Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 runtime error.

#pragma once

namespace dmltwin {

int run_cli(int argc, char** argv);

}  // namespace dmltwin
