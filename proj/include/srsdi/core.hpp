// core.hpp
//
// Shared value types: the complex (subcarrier, antenna) grid, the binary mask
// over the same grid, and the exception hierarchy used across the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace srsdi {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct LinAlgError : Error {
    using Error::Error;
};
struct UnsupportedModeError : Error {
    using Error::Error;
};
struct DivisionByZeroError : NumericError {
    using NumericError::NumericError;
};

// Raised by the iterative samplers when the iterate stops being finite.
struct DivergedError : NumericError {
    DivergedError(const std::string& what, std::size_t level)
        : NumericError(what + " (level " + std::to_string(level) + ")"), level(level) {}
    std::size_t level;
};

struct Shape {
    std::size_t n_subcarriers = 0;
    std::size_t n_antennas = 0;

    std::size_t size() const { return n_subcarriers * n_antennas; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
    return std::to_string(s.n_subcarriers) + "x" + std::to_string(s.n_antennas);
}

inline void require_same_shape(const Shape& a, const Shape& b, const char* where) {
    if (!(a == b))
        throw ShapeError(std::string(where) + ": shape mismatch " + to_string(a) + " vs " +
                         to_string(b));
}

// ---------------------------------------------------------------------------
// Mask
// ---------------------------------------------------------------------------

class Mask {
public:
    Mask() = default;
    Mask(std::size_t n_subcarriers, std::size_t n_antennas, bool value = false)
        : shape_{n_subcarriers, n_antennas}, bits_(shape_.size(), value ? 1 : 0) {
        if (n_subcarriers == 0 || n_antennas == 0)
            throw ParameterError("Mask: dimensions must be positive");
    }

    static Mask ones(std::size_t n, std::size_t a) { return Mask(n, a, true); }
    static Mask zeros(std::size_t n, std::size_t a) { return Mask(n, a, false); }

    const Shape& shape() const { return shape_; }
    std::size_t n_subcarriers() const { return shape_.n_subcarriers; }
    std::size_t n_antennas() const { return shape_.n_antennas; }
    std::size_t size() const { return bits_.size(); }

    bool operator()(std::size_t k, std::size_t a) const { return bits_[k * shape_.n_antennas + a] != 0; }
    void set(std::size_t k, std::size_t a, bool v) { bits_[k * shape_.n_antennas + a] = v ? 1 : 0; }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set_flat(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }
    double density() const { return static_cast<double>(count()) / static_cast<double>(size()); }

    // Subcarrier k is active when any antenna bit on it is set.
    bool subcarrier_active(std::size_t k) const {
        for (std::size_t a = 0; a < shape_.n_antennas; ++a)
            if ((*this)(k, a)) return true;
        return false;
    }
    std::vector<std::size_t> active_subcarriers() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < shape_.n_subcarriers; ++k)
            if (subcarrier_active(k)) out.push_back(k);
        return out;
    }

    Mask operator&(const Mask& o) const {
        require_same_shape(shape_, o.shape_, "Mask::operator&");
        Mask r = *this;
        for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & o.bits_[i];
        return r;
    }
    Mask operator|(const Mask& o) const {
        require_same_shape(shape_, o.shape_, "Mask::operator|");
        Mask r = *this;
        for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] | o.bits_[i];
        return r;
    }
    bool subset_of(const Mask& o) const {
        require_same_shape(shape_, o.shape_, "Mask::subset_of");
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] && !o.bits_[i]) return false;
        return true;
    }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    Shape shape_{};
    std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// ComplexGrid
// ---------------------------------------------------------------------------

// Complex values over (subcarrier k, antenna a), row-major in k.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(std::size_t n_subcarriers, std::size_t n_antennas, cplx fill = {})
        : shape_{n_subcarriers, n_antennas}, values_(shape_.size(), fill) {
        if (n_subcarriers == 0 || n_antennas == 0)
            throw ParameterError("ComplexGrid: dimensions must be positive");
    }
    ComplexGrid(std::size_t n_subcarriers, std::size_t n_antennas, std::vector<cplx> values)
        : shape_{n_subcarriers, n_antennas}, values_(std::move(values)) {
        if (n_subcarriers == 0 || n_antennas == 0)
            throw ParameterError("ComplexGrid: dimensions must be positive");
        if (values_.size() != shape_.size()) throw ShapeError("ComplexGrid: value count mismatch");
        require_finite("ComplexGrid");
    }
    explicit ComplexGrid(const Shape& s) : ComplexGrid(s.n_subcarriers, s.n_antennas) {}

    static ComplexGrid from_mask(const Mask& m) {
        ComplexGrid g(m.n_subcarriers(), m.n_antennas());
        for (std::size_t i = 0; i < m.size(); ++i) g.values_[i] = m[i] ? 1.0 : 0.0;
        return g;
    }

    const Shape& shape() const { return shape_; }
    std::size_t n_subcarriers() const { return shape_.n_subcarriers; }
    std::size_t n_antennas() const { return shape_.n_antennas; }
    std::size_t size() const { return values_.size(); }

    cplx& operator()(std::size_t k, std::size_t a) { return values_[k * shape_.n_antennas + a]; }
    const cplx& operator()(std::size_t k, std::size_t a) const { return values_[k * shape_.n_antennas + a]; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    }
    void require_finite(const char* where) const {
        if (!all_finite()) throw NumericError(std::string(where) + ": non-finite value");
    }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& v : values_) s += std::norm(v);
        return s;
    }

    ComplexGrid& operator+=(const ComplexGrid& o) {
        require_same_shape(shape_, o.shape_, "ComplexGrid::operator+=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    ComplexGrid& operator-=(const ComplexGrid& o) {
        require_same_shape(shape_, o.shape_, "ComplexGrid::operator-=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    ComplexGrid& operator*=(cplx s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    ComplexGrid& operator*=(double s) {
        for (auto& v : values_) v *= s;
        return *this;
    }

    friend ComplexGrid operator+(ComplexGrid a, const ComplexGrid& b) { return a += b; }
    friend ComplexGrid operator-(ComplexGrid a, const ComplexGrid& b) { return a -= b; }
    friend ComplexGrid operator*(ComplexGrid a, double s) { return a *= s; }
    friend ComplexGrid operator*(double s, ComplexGrid a) { return a *= s; }
    friend ComplexGrid operator*(ComplexGrid a, cplx s) { return a *= s; }

    // Elementwise product.
    ComplexGrid hadamard(const ComplexGrid& o) const {
        require_same_shape(shape_, o.shape_, "ComplexGrid::hadamard");
        ComplexGrid r = *this;
        for (std::size_t i = 0; i < values_.size(); ++i) r.values_[i] *= o.values_[i];
        return r;
    }

    friend bool operator==(const ComplexGrid&, const ComplexGrid&) = default;

private:
    Shape shape_{};
    std::vector<cplx> values_;
};

// Elementwise 𝒜 ⊙ X. Masked entries become exactly zero.
inline ComplexGrid apply(const Mask& mask, const ComplexGrid& grid) {
    require_same_shape(mask.shape(), grid.shape(), "apply");
    ComplexGrid out = grid;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!mask[i]) out[i] = cplx{};
    return out;
}

inline double db10(double ratio) { return 10.0 * std::log10(ratio); }
inline double from_db10(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace srsdi
