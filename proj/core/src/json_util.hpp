// Build-private JSON helpers shared by serialize.cpp and the SDP dump.
#pragma once

#include <json.hpp>

#include "incompat/errors.hpp"
#include "incompat/linalg.hpp"

namespace incompat::detail {

using ordered_json = nlohmann::ordered_json;

/// Operator literal: {"re": [[...]], "im": [[...]]} with row-major d x d arrays.
inline ordered_json operator_to_json(const HermitianOperator& op) {
    const int d = op.dim();
    ordered_json re = ordered_json::array();
    ordered_json im = ordered_json::array();
    for (int i = 0; i < d; ++i) {
        ordered_json re_row = ordered_json::array();
        ordered_json im_row = ordered_json::array();
        for (int j = 0; j < d; ++j) {
            re_row.push_back(op.matrix()(i, j).real());
            im_row.push_back(op.matrix()(i, j).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return ordered_json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline HermitianOperator operator_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("re")) {
        throw ConfigError("operator literal: expected an object with \"re\" (and optional \"im\")");
    }
    const auto& re = j.at("re");
    if (!re.is_array() || re.empty()) throw ConfigError("operator literal: \"re\" must be a d x d array");
    const int d = static_cast<int>(re.size());
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
        const auto& row = re.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != d) {
            throw ConfigError("operator literal: \"re\" must be a d x d array");
        }
        for (int jx = 0; jx < d; ++jx) m(i, jx) = Complex(row.at(jx).get<double>(), 0.0);
    }
    if (j.contains("im")) {
        const auto& im = j.at("im");
        if (!im.is_array() || static_cast<int>(im.size()) != d) {
            throw ConfigError("operator literal: \"im\" must be a d x d array");
        }
        for (int i = 0; i < d; ++i) {
            const auto& row = im.at(i);
            if (!row.is_array() || static_cast<int>(row.size()) != d) {
                throw ConfigError("operator literal: \"im\" must be a d x d array");
            }
            for (int jx = 0; jx < d; ++jx) m(i, jx) += Complex(0.0, row.at(jx).get<double>());
        }
    }
    try {
        return HermitianOperator(std::move(m));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("operator literal: ") + e.what());
    }
}

} // namespace incompat::detail
