#ifndef SIGLOOP_ERRORS_HPP
#define SIGLOOP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigloop {

// Broad failure categories; the CLI maps them to exit codes
// (input -> 2, numerical -> 3, validation -> 4).
enum class ErrorKind { input, numerical, validation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what),
          kind_(kind),
          code_(std::move(code)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& code() const { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

// --- expression layer ---

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& what)
        : Error(ErrorKind::input, "SyntaxError",
                what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownSymbol : public Error {
public:
    UnknownSymbol(const std::string& name, std::size_t offset)
        : Error(ErrorKind::input, "UnknownSymbol",
                "'" + name + "' (byte offset " + std::to_string(offset) + ")"),
          name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what)
        : Error(ErrorKind::numerical, "DomainError", what) {}
};

class NonDifferentiable : public Error {
public:
    explicit NonDifferentiable(const std::string& what)
        : Error(ErrorKind::numerical, "NonDifferentiable", what) {}
};

// --- geometry layer ---

class DegenerateMetric : public Error {
public:
    explicit DegenerateMetric(const std::string& what)
        : Error(ErrorKind::numerical, "DegenerateMetric", what) {}
};

class UnsupportedSignature : public Error {
public:
    explicit UnsupportedSignature(const std::string& what)
        : Error(ErrorKind::input, "UnsupportedSignature", what) {}
};

class NotOnHypersurface : public Error {
public:
    explicit NotOnHypersurface(const std::string& what)
        : Error(ErrorKind::input, "NotOnHypersurface", what) {}
};

class NoSignChange : public Error {
public:
    explicit NoSignChange(const std::string& what)
        : Error(ErrorKind::input, "NoSignChange", what) {}
};

class NonTransverseDegeneracy : public Error {
public:
    explicit NonTransverseDegeneracy(const std::string& what)
        : Error(ErrorKind::numerical, "NonTransverseDegeneracy", what) {}
};

// --- curve layer ---

class FrameDegenerated : public Error {
public:
    explicit FrameDegenerated(const std::string& what)
        : Error(ErrorKind::numerical, "FrameDegenerated", what) {}
};

class LeftChartDomain : public Error {
public:
    explicit LeftChartDomain(const std::string& what)
        : Error(ErrorKind::numerical, "LeftChartDomain", what) {}
};

class StepSizeUnderflow : public Error {
public:
    explicit StepSizeUnderflow(const std::string& what)
        : Error(ErrorKind::numerical, "StepSizeUnderflow", what) {}
};

class EscapedBox : public Error {
public:
    explicit EscapedBox(const std::string& what)
        : Error(ErrorKind::numerical, "EscapedBox", what) {}
};

class DegenerateStart : public Error {
public:
    explicit DegenerateStart(const std::string& what)
        : Error(ErrorKind::input, "DegenerateStart", what) {}
};

// --- gap layer ---

class SingularFrame : public Error {
public:
    explicit SingularFrame(const std::string& what)
        : Error(ErrorKind::input, "SingularFrame", what) {}
};

class FramesNotRelated : public Error {
public:
    explicit FramesNotRelated(const std::string& what)
        : Error(ErrorKind::validation, "FramesNotRelated", what) {}
};

// --- loops layer ---

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what)
        : Error(ErrorKind::input, "NotPositiveDefinite", what) {}
};

class BoxOutsideChart : public Error {
public:
    explicit BoxOutsideChart(const std::string& what)
        : Error(ErrorKind::input, "BoxOutsideChart", what) {}
};

class ContainmentViolated : public Error {
public:
    explicit ContainmentViolated(const std::string& what)
        : Error(ErrorKind::validation, "ContainmentViolated", what) {}
};

class CrossingsCoincide : public Error {
public:
    explicit CrossingsCoincide(const std::string& what)
        : Error(ErrorKind::numerical, "CrossingsCoincide", what) {}
};

class FoliationNotSpacelike : public Error {
public:
    explicit FoliationNotSpacelike(const std::string& what)
        : Error(ErrorKind::input, "FoliationNotSpacelike", what) {}
};

// --- generic ---

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorKind::input, "InvalidArgument", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what)
        : Error(ErrorKind::input, "IoError", what) {}
};

}  // namespace sigloop

#endif
