/*
   Copyright 2026 The atomchip Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "atomchip/report_json.hpp"

namespace atomchip {

namespace {

nlohmann::json vec(const Vec3& v, double scale = 1.0)
{
    return nlohmann::json::array({v.x() * scale, v.y() * scale, v.z() * scale});
}

}  // namespace

nlohmann::json to_json(const TrapReport& r)
{
    const MajoranaFigure m = majorana_figure(r);
    nlohmann::json j;
    j["schema"] = "atomchip.trap_report";
    j["schema_version"] = kJsonSchemaVersion;
    j["position_m"] = vec(r.position);
    j["position_um"] = vec(r.position, 1e6);
    j["distance_to_chip_m"] = r.distance_to_chip;
    j["distance_to_chip_um"] = r.distance_to_chip * 1e6;
    j["B0_T"] = r.B0;
    j["B0_G"] = r.B0 * 1e4;
    j["frequencies_Hz"] = vec(r.frequencies);
    j["axial_frequency_Hz"] = r.frequencies[0];
    j["anisotropy"] = r.anisotropy();
    j["principal_axes"] = nlohmann::json::array({vec(r.axes.col(0)), vec(r.axes.col(1)), vec(r.axes.col(2))});
    j["gradient_T_per_m"] = vec(r.gradient);
    j["gradient_G_per_cm"] = vec(r.gradient, 100.0);
    j["curvature_T_per_m2"] = vec(r.curvature);
    j["depth_J"] = r.depth;
    j["depth_uK"] = r.depth_microkelvin();
    j["depth_channel"] = r.depth_channel;
    j["spin"] = {{"F", r.spin.F}, {"mF", r.spin.mF}, {"gF", r.spin.gF}};
    j["mass_kg"] = r.mass;
    j["majorana_adiabaticity"] = m.adiabaticity;
    j["majorana_loss_prone"] = m.loss_prone;
    return j;
}

nlohmann::json to_json(const QuadrupoleReport& q)
{
    nlohmann::json j;
    j["schema"] = "atomchip.quadrupole_report";
    j["schema_version"] = kJsonSchemaVersion;
    j["zero_m"] = vec(q.zero);
    j["zero_um"] = vec(q.zero, 1e6);
    j["distance_to_chip_um"] = q.zero.y() * 1e6;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({q.gradient_tensor(i, 0), q.gradient_tensor(i, 1), q.gradient_tensor(i, 2)});
    j["gradient_tensor_T_per_m"] = rows;
    j["gradient_norm_T_per_m"] = q.gradient_norm;
    j["gradient_norm_G_per_cm"] = q.gradient_norm * 100.0;
    j["strongest_gradient_G_per_cm"] = q.strongest_gradient * 100.0;
    return j;
}

nlohmann::json to_json(const FitResult& f)
{
    nlohmann::json j;
    j["schema"] = "atomchip.fit_result";
    j["schema_version"] = kJsonSchemaVersion;
    j["model"] = f.model;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["sse"] = f.sse;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json order = nlohmann::json::array();
    for (const auto& p : f.parameters) {
        params[p.name] = {{"value", p.value}, {"uncertainty", p.uncertainty}};
        order.push_back(p.name);
    }
    j["parameters"] = params;
    j["parameter_order"] = order;
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(f.covariance(r, c));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    j["warnings"] = f.warnings;
    return j;
}

nlohmann::json to_json(const PressureQuery& q, const PressureResult& r)
{
    nlohmann::json j;
    j["schema"] = "atomchip.pressure";
    j["schema_version"] = kJsonSchemaVersion;
    j["lifetime_s"] = q.lifetime;
    j["cross_section_m2"] = q.cross_section;
    j["gas_temperature_K"] = q.gas_temperature;
    j["gas_mass_kg"] = q.gas_mass;
    j["mean_speed_m_s"] = r.mean_speed;
    j["pressure_Pa"] = r.pascal;
    j["pressure_mbar"] = r.mbar;
    return j;
}

}  // namespace atomchip
