#pragma once

namespace sprsim {

/// How a data-parallel kernel is executed. Both paths are bit-identical.
struct Exec {
  int threads = 1;

  static Exec serial() { return Exec{1}; }
  bool parallel() const { return threads > 1; }
};

}  // namespace sprsim
