#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace discafem {

/// Invalid initial mesh: degenerate, non-conforming or incompatibly labelled.
class MeshError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation that requires a conforming partition was handed one with hanging nodes.
class NonConformingError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// A partition does not match the forest or the data it is combined with.
class PartitionMismatchError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative procedure stopped without reaching its target.
class ConvergenceError : public std::runtime_error
{
public:
    ConvergenceError(const std::string& what, double reached, double target, std::size_t work)
        : std::runtime_error(what), reached_(reached), target_(target), work_(work)
    {
    }

    /// Error (or residual) value at the moment of giving up.
    double reached() const noexcept { return reached_; }
    double target() const noexcept { return target_; }
    /// Iterations, elements, or whatever the failing loop counts.
    std::size_t work() const noexcept { return work_; }

private:
    double reached_;
    double target_;
    std::size_t work_;
};

} // namespace discafem
