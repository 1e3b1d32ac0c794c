#pragma once

#include <stdexcept>
#include <string>

namespace netlineq {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise inadmissible numeric input.
class invalid_input_error : public error {
public:
    using error::error;
};

/// Dimension mismatch or indivisible block layout.
class shape_error : public error {
public:
    using error::error;
};

/// Requested result would exceed the configured size limits.
class size_error : public error {
public:
    using error::error;
};

/// The affine set {y : Hy = z} is empty.
class infeasible_set_error : public error {
public:
    using error::error;
};

/// Row-block partition does not match the equation dimensions.
class partition_error : public error {
public:
    using error::error;
};

/// Malformed input file; message carries the line number.
class parse_error : public error {
public:
    using error::error;
};

/// Operation needs closed-form marginals the process kind cannot provide.
class unsupported_process_error : public error {
public:
    using error::error;
};

/// Mixing step size outside the admissible interval.
class invalid_step_error : public error {
public:
    using error::error;
};

/// Step-size schedule violates alpha(t) <= h at the current iteration.
class step_order_error : public error {
public:
    using error::error;
};

/// A sampled equation row has zero norm.
class degenerate_row_error : public error {
public:
    using error::error;
};

/// Graph sequence fails a required joint-connectivity condition.
class connectivity_error : public error {
public:
    using error::error;
};

/// Parameter outside its documented range.
class parameter_error : public error {
public:
    using error::error;
};

/// Series values outside the domain of the requested fit.
class domain_error : public error {
public:
    using error::error;
};

/// Invalid or inconsistent experiment configuration.
class config_error : public error {
public:
    using error::error;
};

/// Filesystem failure; message carries the path.
class io_error : public error {
public:
    using error::error;
};

} // namespace netlineq
