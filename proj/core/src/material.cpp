#include "nloct/material.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nloct/errors.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

double sellmeier_n(const SellmeierSet& s, double lambda_um, double temp_c) {
    const double f = (temp_c - 24.5) * (temp_c + 570.82);
    const double l2 = lambda_um * lambda_um;
    const double res1 = s.a3 + s.b3 * f;
    const double n2 = s.a1 + s.b1 * f
                    + (s.a2 + s.b2 * f) / (l2 - res1 * res1)
                    + (s.a4 + s.b4 * f) / (l2 - s.a5 * s.a5)
                    - s.a6 * l2;
    if (!(n2 > 1.0)) {
        throw RangeError("sellmeier evaluation outside physical region (n^2 = "
                         + std::to_string(n2) + " at " + std::to_string(lambda_um) + " um)");
    }
    return std::sqrt(n2);
}

SellmeierSet sellmeier_from_json(const nlohmann::json& j) {
    SellmeierSet s{};
    s.a1 = j.at("a").at(0).get<double>();
    s.a2 = j.at("a").at(1).get<double>();
    s.a3 = j.at("a").at(2).get<double>();
    s.a4 = j.at("a").at(3).get<double>();
    s.a5 = j.at("a").at(4).get<double>();
    s.a6 = j.at("a").at(5).get<double>();
    s.b1 = j.at("b").at(0).get<double>();
    s.b2 = j.at("b").at(1).get<double>();
    s.b3 = j.at("b").at(2).get<double>();
    s.b4 = j.at("b").at(3).get<double>();
    return s;
}

}  // namespace

const MaterialDb& MaterialDb::builtin() {
    static const MaterialDb db = [] {
        MaterialDb d;
        MaterialRecord r;
        r.id = "mgo_cln_5pct";
        // O. Gayer, Z. Sacks, E. Galun, A. Arie, Appl. Phys. B 91, 343 (2008):
        // 5% MgO-doped congruent lithium niobate, 20-200 C, 0.5-4 um.
        r.extraordinary = {5.756, 0.0983, 0.2020, 189.32, 12.52, 1.32e-2,
                           2.860e-6, 4.700e-8, 6.113e-8, 1.516e-4};
        r.ordinary = {5.653, 0.1185, 0.2091, 89.61, 10.85, 1.97e-2,
                      7.941e-7, 3.134e-8, -4.641e-9, -2.188e-6};
        r.wavelength_min_m = 0.5 * kUm;
        r.wavelength_max_m = 4.0 * kUm;
        r.temperature_min_k = 293.0;
        r.temperature_max_k = 473.15;
        // a-axis expansion of LiNbO3 (D. H. Jundt, Opt. Lett. 22, 1553 (1997) convention).
        r.expansion_alpha = 1.54e-5;
        r.expansion_beta = 5.3e-9;
        r.expansion_ref_c = 25.0;
        r.citation = "Gayer et al., Appl. Phys. B 91, 343 (2008)";
        d.add(std::move(r));
        return d;
    }();
    return db;
}

MaterialDb MaterialDb::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open material database: " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("material database parse failure (" + path + "): " + e.what());
    }
    MaterialDb db;
    try {
        db.version = j.value("version", std::string("1"));
        db.guard_fraction = j.value("guard_fraction", 0.05);
        db.temperature_guard_k = j.value("temperature_guard_k", 10.0);
        for (const auto& m : j.at("materials")) {
            MaterialRecord r;
            r.id = m.at("id").get<std::string>();
            r.extraordinary = sellmeier_from_json(m.at("sellmeier_e"));
            r.ordinary = sellmeier_from_json(m.at("sellmeier_o"));
            r.wavelength_min_m = m.at("wavelength_range_um").at(0).get<double>() * kUm;
            r.wavelength_max_m = m.at("wavelength_range_um").at(1).get<double>() * kUm;
            r.temperature_min_k = m.at("temperature_range_k").at(0).get<double>();
            r.temperature_max_k = m.at("temperature_range_k").at(1).get<double>();
            r.expansion_alpha = m.value("expansion_alpha", 0.0);
            r.expansion_beta = m.value("expansion_beta", 0.0);
            r.expansion_ref_c = m.value("expansion_ref_c", 25.0);
            const std::string inter = m.value("interaction", std::string("eee"));
            if (inter.size() != 3 || inter.find_first_not_of("eo") != std::string::npos) {
                throw IoError("material " + r.id + ": interaction must be three of {e,o}");
            }
            auto pol_of = [](char ch) {
                return ch == 'e' ? Polarization::Extraordinary : Polarization::Ordinary;
            };
            r.pump_pol = pol_of(inter[0]);
            r.signal_pol = pol_of(inter[1]);
            r.idler_pol = pol_of(inter[2]);
            r.citation = m.value("citation", std::string());
            db.add(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("material database schema error (" + path + "): " + e.what());
    }
    return db;
}

void MaterialDb::add(MaterialRecord record) {
    records_[record.id] = std::move(record);
}

const MaterialRecord& MaterialDb::at(const std::string& material_id) const {
    auto it = records_.find(material_id);
    if (it == records_.end()) {
        throw ValidationError("unknown material id: " + material_id);
    }
    return it->second;
}

bool MaterialDb::contains(const std::string& material_id) const {
    return records_.count(material_id) > 0;
}

double refractive_index(const MaterialDb& db, const std::string& material_id,
                        double wavelength_m, double temperature_k, Polarization pol) {
    const MaterialRecord& mat = db.at(material_id);
    const double lo = mat.wavelength_min_m * (1.0 - db.guard_fraction);
    const double hi = mat.wavelength_max_m * (1.0 + db.guard_fraction);
    if (!(wavelength_m >= lo && wavelength_m <= hi)) {
        std::ostringstream msg;
        msg << "wavelength " << wavelength_m / kUm << " um outside the guarded validity ["
            << lo / kUm << ", " << hi / kUm << "] um of material " << material_id;
        throw RangeError(msg.str());
    }
    if (!(temperature_k >= mat.temperature_min_k - db.temperature_guard_k &&
          temperature_k <= mat.temperature_max_k + db.temperature_guard_k)) {
        std::ostringstream msg;
        msg << "temperature " << temperature_k << " K outside the guarded validity of material "
            << material_id;
        throw RangeError(msg.str());
    }
    const SellmeierSet& set =
        (pol == Polarization::Extraordinary) ? mat.extraordinary : mat.ordinary;
    return sellmeier_n(set, wavelength_m / kUm, temperature_k - kZeroCelsiusK);
}

double effective_poling_period(const MaterialRecord& mat, double period_at_ref_m,
                               double temperature_k) {
    const double dt = (temperature_k - kZeroCelsiusK) - mat.expansion_ref_c;
    return period_at_ref_m * (1.0 + mat.expansion_alpha * dt + mat.expansion_beta * dt * dt);
}

}  // namespace nloct
