#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fhn {

// Error taxonomy shared by the library and the CLI. The category string is
// stable and machine-parsable; what() is "<category>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(category + ": " + message),
        category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

#define FHN_DECLARE_ERROR(Name)                       \
  class Name : public Error {                         \
   public:                                            \
    explicit Name(const std::string& message)         \
        : Error(#Name, message) {}                    \
  }

FHN_DECLARE_ERROR(ConfigError);
FHN_DECLARE_ERROR(GridError);
FHN_DECLARE_ERROR(StabilityError);
FHN_DECLARE_ERROR(EmptyDensity);
FHN_DECLARE_ERROR(MissingBuffer);
FHN_DECLARE_ERROR(RangeError);
FHN_DECLARE_ERROR(NoConvergence);
FHN_DECLARE_ERROR(TooShort);
FHN_DECLARE_ERROR(OutOfBand);
FHN_DECLARE_ERROR(IoError);

#undef FHN_DECLARE_ERROR

}  // namespace fhn
