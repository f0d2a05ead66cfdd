#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace finray {

/// Base of every error raised by the workbench. `kind()` is the stable,
/// machine-readable tag that the CLI reports in its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)), message_(message) {}

    const std::string& kind() const noexcept { return kind_; }
    const char* what() const noexcept override { return message_.c_str(); }
    /// Prefixes "context: " to the message; the dynamic type is kept so callers can rethrow.
    void add_context(const std::string& context) { message_ = context + ": " + message_; }

private:
    std::string kind_;
    std::string message_;
};

#define FINRAY_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

FINRAY_DEFINE_ERROR(InvalidDesign);
FINRAY_DEFINE_ERROR(MeshFailure);
FINRAY_DEFINE_ERROR(InvalidArgument);
FINRAY_DEFINE_ERROR(DepthOutOfRange);
FINRAY_DEFINE_ERROR(DegenerateMirror);
FINRAY_DEFINE_ERROR(DegenerateCorrespondence);
FINRAY_DEFINE_ERROR(DimensionMismatch);
FINRAY_DEFINE_ERROR(EmptyMask);
FINRAY_DEFINE_ERROR(EmptyClass);
FINRAY_DEFINE_ERROR(InvalidCrop);
FINRAY_DEFINE_ERROR(EmptyTrainingSet);
FINRAY_DEFINE_ERROR(InvalidRecord);
FINRAY_DEFINE_ERROR(ParseError);
FINRAY_DEFINE_ERROR(UnknownKey);
FINRAY_DEFINE_ERROR(MissingRequired);
FINRAY_DEFINE_ERROR(IoError);

#undef FINRAY_DEFINE_ERROR

class ElementInverted : public Error {
public:
    ElementInverted(std::size_t element, double det)
        : Error("ElementInverted", "element " + std::to_string(element) +
                                       " inverted (J = " + std::to_string(det) + ")"),
          element_(element), det_(det) {}

    std::size_t element() const noexcept { return element_; }
    double det() const noexcept { return det_; }

private:
    std::size_t element_;
    double det_;
};

class NonConvergence : public Error {
public:
    NonConvergence(int step, int iterations, const std::string& detail = {})
        : Error("NonConvergence", "Newton failed at load step " + std::to_string(step) + " after " +
                                      std::to_string(iterations) + " iterations" +
                                      (detail.empty() ? "" : ": " + detail)),
          step_(step), iterations_(iterations) {}

    int step() const noexcept { return step_; }
    int iterations() const noexcept { return iterations_; }

private:
    int step_;
    int iterations_;
};

class Unreachable : public Error {
public:
    explicit Unreachable(std::vector<std::size_t> blocked)
        : Error("Unreachable", std::to_string(blocked.size()) +
                                   " sensing samples cannot be reached by any one-bounce ray"),
          blocked_(std::move(blocked)) {}

    const std::vector<std::size_t>& blocked() const noexcept { return blocked_; }

private:
    std::vector<std::size_t> blocked_;
};

}  // namespace finray
