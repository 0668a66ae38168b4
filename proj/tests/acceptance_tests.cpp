// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

// Acceptance suite: one pass/fail line per criterion.

#include <cstdio>

int main() {
    std::printf("acceptance suite placeholder\n");
    return 1;
}
