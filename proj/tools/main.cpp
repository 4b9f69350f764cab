// SPDX-License-Identifier: Apache-2.0
#include "gaze/pipeline.hpp"

int main(int argc, char** argv) {
    return gaze::cli_main(argc, argv);
}
