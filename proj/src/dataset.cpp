#include "skewimpute/dataset.hpp"

#include "skewimpute/errors.hpp"

namespace skewimpute {

const char* design_name(Design d) {
    switch (d) {
        case Design::bivariate: return "bivariate";
        case Design::trivariate: return "trivariate";
    }
    throw InvalidInput("design_name: unknown design");
}

Design design_from_name(const std::string& s) {
    if (s == "bivariate") return Design::bivariate;
    if (s == "trivariate") return Design::trivariate;
    throw InvalidInput("design_from_name: unknown design '" + s + "'");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::linear: return "linear";
        case Method::linear_censored: return "censored";
        case Method::linear_truncated: return "truncated";
        case Method::quadratic: return "quadratic";
        case Method::transform_x: return "transform_x";
        case Method::transform_all: return "transform_all";
        case Method::truncated_regression: return "truncreg";
        case Method::fn_univariate: return "fn_univariate";
        case Method::none: return "none";
    }
    throw InvalidInput("method_name: unknown method");
}

Method method_from_name(const std::string& s) {
    if (s == "linear") return Method::linear;
    if (s == "censored") return Method::linear_censored;
    if (s == "truncated") return Method::linear_truncated;
    if (s == "quadratic") return Method::quadratic;
    if (s == "transform_x") return Method::transform_x;
    if (s == "transform_all") return Method::transform_all;
    if (s == "truncreg") return Method::truncated_regression;
    if (s == "fn_univariate") return Method::fn_univariate;
    if (s == "none") return Method::none;
    throw InvalidInput("method_from_name: unknown method '" + s + "'");
}

const std::vector<Method>& sweep_methods() {
    static const std::vector<Method> methods = {
        Method::linear,      Method::linear_censored, Method::linear_truncated,
        Method::quadratic,   Method::transform_x,     Method::transform_all,
        Method::truncated_regression,
    };
    return methods;
}

}  // namespace skewimpute
