#pragma once

#include <map>
#include <string>

namespace nloct {

enum class Polarization { Ordinary, Extraordinary };

/// Temperature-dependent Sellmeier coefficient set (one polarization).
///
/// n^2 = a1 + b1 f + (a2 + b2 f) / (L^2 - (a3 + b3 f)^2)
///          + (a4 + b4 f) / (L^2 - a5^2) - a6 L^2
/// with L the vacuum wavelength in micrometers and
/// f = (T - 24.5)(T + 570.82), T in degrees Celsius.
struct SellmeierSet {
    double a1, a2, a3, a4, a5, a6;
    double b1, b2, b3, b4;
};

struct MaterialRecord {
    std::string id;
    SellmeierSet extraordinary;
    SellmeierSet ordinary;
    // Stated validity of the fit; evaluation is allowed a relative guard band
    // beyond these edges and rejected past it.
    double wavelength_min_m;
    double wavelength_max_m;
    double temperature_min_k;
    double temperature_max_k;
    // Thermal expansion of the poled grating along the propagation axis:
    // L(T) = L_ref (1 + alpha dT + beta dT^2), dT = T_C - expansion_ref_c.
    double expansion_alpha;
    double expansion_beta;
    double expansion_ref_c;
    // Down-conversion interaction (pump, signal, idler wave polarizations);
    // type-0 e->ee for the poled d33 geometry.
    Polarization pump_pol = Polarization::Extraordinary;
    Polarization signal_pol = Polarization::Extraordinary;
    Polarization idler_pol = Polarization::Extraordinary;
    std::string citation;
};

/// Keyed store of dispersion models, loadable from a JSON database file.
class MaterialDb {
public:
    /// Compiled-in default set (currently 5% MgO-doped congruent LiNbO3).
    static const MaterialDb& builtin();

    /// Parse a material database file (schema documented in the repo README).
    static MaterialDb load(const std::string& path);

    void add(MaterialRecord record);
    const MaterialRecord& at(const std::string& material_id) const;
    bool contains(const std::string& material_id) const;

    /// Guard band: inputs within this relative margin outside the stated
    /// validity are evaluated; anything further raises RangeError.
    double guard_fraction = 0.05;
    double temperature_guard_k = 10.0;

    std::string version = "1";

private:
    std::map<std::string, MaterialRecord> records_;
};

/// Sellmeier refractive index with validity/guard-band enforcement.
/// Throws RangeError outside the guarded validity window.
double refractive_index(const MaterialDb& db, const std::string& material_id,
                        double wavelength_m, double temperature_k, Polarization pol);

/// Poling period corrected for thermal expansion at the operating temperature.
double effective_poling_period(const MaterialRecord& mat, double period_at_ref_m,
                               double temperature_k);

}  // namespace nloct
