/* Copyright 2026 The Semcomp Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Regenerates the bundled synthetic fixture.

#include <iostream>

#include "semcomp/error.hpp"
#include "semcomp/fixture.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: semcomp-make-fixture <output-dir>\n";
    return 1;
  }
  try {
    semcomp::fixture::write_fixture(argv[1]);
  } catch (const semcomp::Error& e) {
    std::cerr << "semcomp-make-fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
