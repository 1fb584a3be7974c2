#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace stapcov {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr std::string_view kVersion = "0.3.1";

/// Raised for invalid configurations and rejected inputs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant was violated (a bug, not bad input).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Method { SMI, MAP, R_MAP, S_MAP, RS_MAP, CLAIRVOYANT };

inline constexpr Method kAllEstimators[] = {Method::SMI, Method::MAP, Method::R_MAP, Method::S_MAP,
                                            Method::RS_MAP};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::SMI: return "SMI";
        case Method::MAP: return "MAP";
        case Method::R_MAP: return "R-MAP";
        case Method::S_MAP: return "S-MAP";
        case Method::RS_MAP: return "RS-MAP";
        case Method::CLAIRVOYANT: return "CLAIRVOYANT";
    }
    return "?";
}

/// Lower-case file-name stem; the clairvoyant model is written as "truth".
inline std::string_view file_stem(Method m) {
    switch (m) {
        case Method::SMI: return "smi";
        case Method::MAP: return "map";
        case Method::R_MAP: return "r_map";
        case Method::S_MAP: return "s_map";
        case Method::RS_MAP: return "rs_map";
        case Method::CLAIRVOYANT: return "truth";
    }
    return "unknown";
}

/// Accepts the canonical tags case-insensitively, plus "truth" for the clairvoyant model.
inline Method parse_method(std::string_view tag) {
    std::string t;
    for (char c : tag) {
        if (c == '_') c = '-';
        t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (t == "SMI") return Method::SMI;
    if (t == "MAP") return Method::MAP;
    if (t == "R-MAP" || t == "RMAP") return Method::R_MAP;
    if (t == "S-MAP" || t == "SMAP") return Method::S_MAP;
    if (t == "RS-MAP" || t == "RSMAP") return Method::RS_MAP;
    if (t == "CLAIRVOYANT" || t == "TRUTH") return Method::CLAIRVOYANT;
    throw Error("unknown method tag '" + std::string(tag) + "'");
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace stapcov
