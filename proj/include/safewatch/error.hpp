#pragma once

#include <stdexcept>
#include <string>

namespace safewatch {

enum class ErrorKind {
  Parse,           // malformed input file
  Integrity,       // duplicate keys, dangling references
  Config,          // unusable configuration (empty lexicon, infeasible synth settings)
  Parameter,       // numeric argument outside its precondition
  Schema,          // model/feature schema mismatch
  Labeling,        // graph node without a safety label
  Extraction,      // feature extraction failed for a record
  Coverage,        // partition does not cover every node
  Stratification,  // split impossible for lack of a class
  Internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. `module()` names the component that
/// raised it so the CLI can print a one-line locator.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace safewatch
