#include "btm/solar.hpp"

#include <algorithm>
#include <cmath>

namespace btm {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double deg = pi / 180.0;

// Broadband beam transmittance exponent and diffuse fraction of the simple
// clear-sky model. Chosen to give realistic mid-latitude noon capacity
// factors around 0.85-0.95, not for radiometric accuracy.
constexpr double beam_extinction = 0.18;
constexpr double diffuse_fraction = 0.10;

double hour_angle_rad(double hour) {
    return 15.0 * deg * (hour - 12.0); // negative in the morning
}

} // namespace

double solar_declination_rad(int day_of_year) {
    return 0.409280 * std::sin(2.0 * pi * (284.0 + day_of_year) / 365.0);
}

double cos_zenith(double latitude_deg, int day_of_year, double hour) {
    double phi = latitude_deg * deg;
    double delta = solar_declination_rad(day_of_year);
    double omega = hour_angle_rad(hour);
    return std::sin(delta) * std::sin(phi) + std::cos(delta) * std::cos(phi) * std::cos(omega);
}

double cos_incidence(double latitude_deg, double tilt_deg, double azimuth_deg,
                     int day_of_year, double hour) {
    double phi = latitude_deg * deg;
    double beta = tilt_deg * deg;
    // Surface azimuth measured from south, positive toward west.
    double gamma = (azimuth_deg - 180.0) * deg;
    double delta = solar_declination_rad(day_of_year);
    double omega = hour_angle_rad(hour);

    double sd = std::sin(delta), cd = std::cos(delta);
    double sp = std::sin(phi), cp = std::cos(phi);
    double sb = std::sin(beta), cb = std::cos(beta);
    double sg = std::sin(gamma), cg = std::cos(gamma);
    double so = std::sin(omega), co = std::cos(omega);

    return sd * sp * cb - sd * cp * sb * cg + cd * cp * cb * co + cd * sp * sb * cg * co +
           cd * sb * sg * so;
}

double clear_sky_fraction(double latitude_deg, double tilt_deg, double azimuth_deg,
                          int day_of_year, double hour) {
    double cz = cos_zenith(latitude_deg, day_of_year, hour);
    if (cz <= 0.0) return 0.0;
    double dni = std::exp(-beam_extinction / std::max(cz, 0.02));
    double beam = dni * std::max(0.0, cos_incidence(latitude_deg, tilt_deg, azimuth_deg,
                                                    day_of_year, hour));
    double diffuse = diffuse_fraction * cz * 0.5 * (1.0 + std::cos(tilt_deg * deg));
    return std::clamp(beam + diffuse, 0.0, 1.0);
}

} // namespace btm
