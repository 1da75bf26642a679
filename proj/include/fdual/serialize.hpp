#pragma once

// JSON layout: {"dim": d, "basis_convention": "column-stacking",
//               "entries": [[[re, im], ...], ...]} with rows outermost.

#include <json.hpp>

#include "fdual/liouville.hpp"

namespace fdual {

using json = nlohmann::json;

template <class Real>
json matrix_to_json(const CMat<Real>& A) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real(), A(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

// Accepts [re, im] pairs or plain real numbers.
inline Op matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw config_error("matrix must be a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.at(0).size());
    Op A(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) throw config_error("ragged matrix rows");
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& e = row.at(static_cast<std::size_t>(j));
            if (e.is_number()) {
                A(i, j) = cplx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2) {
                A(i, j) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
            } else {
                throw config_error("matrix entries must be numbers or [re, im] pairs");
            }
        }
    }
    return A;
}

inline json operator_to_json(const Op& X) {
    return {{"dim", X.rows()}, {"basis_convention", basis_convention}, {"entries", matrix_to_json<double>(X)}};
}

inline json superop_to_json(const SuperOp& S) {
    return {{"dim", dim_of_super(S)}, {"basis_convention", basis_convention}, {"entries", matrix_to_json<double>(S)}};
}

inline Op operator_from_json(const json& j) {
    Op X = matrix_from_json(j.at("entries"));
    if (X.rows() != j.at("dim").get<Eigen::Index>() || X.cols() != X.rows()) throw dimension_error("operator dim mismatch");
    return X;
}

inline SuperOp superop_from_json(const json& j) {
    if (j.contains("basis_convention") && j.at("basis_convention") != basis_convention)
        throw config_error("unsupported basis convention");
    SuperOp S = matrix_from_json(j.at("entries"));
    const auto d = j.at("dim").get<Eigen::Index>();
    if (S.rows() != d * d || S.cols() != d * d) throw dimension_error("superoperator dim mismatch");
    return S;
}

}  // namespace fdual
