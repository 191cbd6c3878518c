#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskphase/month.hpp"
#include "riskphase/series.hpp"

namespace riskphase {

enum class InterventionType { Fatal, Regulatory, Company, Deployment, Platform, Standards };
enum class ExpectedEffect { Mitigation, Shock };
enum class ImpactDirection { Mitigation, Deterioration, None };
enum class FdrMethod { BH, BY };

std::string_view to_string(InterventionType t);
std::string_view to_string(ExpectedEffect e);
std::string_view to_string(ImpactDirection d);
std::string_view to_string(FdrMethod m);
InterventionType parse_intervention_type(std::string_view text);
ExpectedEffect parse_expected_effect(std::string_view text);
FdrMethod parse_fdr_method(std::string_view text);

struct InterventionEvent {
  std::string name;
  MonthIndex month;
  InterventionType type = InterventionType::Regulatory;
  ExpectedEffect expected_effect = ExpectedEffect::Mitigation;
  int window_months = 3;
  std::optional<std::string> wave;
};

/// CSV columns: name, month, type, expected_effect, wave (optional column).
std::vector<InterventionEvent> load_interventions(std::istream& in, int window_months = 3);

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

/// Welch t-test of b against a (t > 0 when mean(b) > mean(a)). Sample variances.
WelchTest welch_t_test(std::span<const double> a, std::span<const double> b);

struct ImpactResult {
  std::string event;
  MonthIndex anchor;
  int window = 0;
  std::size_t n_pre = 0, n_post = 0;
  bool truncated = false;
  double pre_mean = 0.0;
  double post_mean = 0.0;
  double delta = 0.0;
  double t_stat = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_fdr = 1.0;
  ImpactDirection direction = ImpactDirection::None;
};

/// pre = [m - w, m - 1], post = [m, m + w - 1], clipped to the series.
/// Throws InsufficientWindow when either side has fewer than two months.
/// Direction stays None until an FDR adjustment is applied.
ImpactResult event_impact(const RiskSeries& risk, const std::string& name, MonthIndex anchor, int window);
ImpactResult event_impact(const RiskSeries& risk, const InterventionEvent& event);

/// Step-up adjusted p-values, monotone and clipped to 1.
std::vector<double> fdr_adjust(std::span<const double> p_values, FdrMethod method = FdrMethod::BH);

/// Fills p_fdr and direction across a family of results.
void apply_fdr(std::vector<ImpactResult>& results, FdrMethod method = FdrMethod::BH, double alpha = 0.05);

struct ImpactFamily {
  std::vector<ImpactResult> results;
  std::vector<std::pair<std::string, std::string>> skipped;  // event, reason
  FdrMethod method = FdrMethod::BH;
};

/// Tests every event that has a usable window, then adjusts across the family.
ImpactFamily impact_family(const RiskSeries& risk, std::span<const InterventionEvent> events,
                           FdrMethod method = FdrMethod::BH);

struct EffectConfusion {
  // rows: expected {mitigation, shock}; columns: actual {mitigation, neutral, shock}
  std::array<std::array<int, 3>, 2> counts{};
  std::array<int, 2> row_totals{};
  std::array<int, 3> column_totals{};
  int total = 0;
};

/// results[i] pairs with events[i] by name.
EffectConfusion expected_vs_actual(std::span<const InterventionEvent> events, std::span<const ImpactResult> results);

/// One test per wave anchored at the wave's earliest event, FDR across waves.
ImpactFamily wave_impact(const RiskSeries& risk, const std::map<std::string, std::vector<InterventionEvent>>& waves,
                         int window = 6, FdrMethod method = FdrMethod::BH);

/// Groups events by their wave field; events without a wave are left out.
std::map<std::string, std::vector<InterventionEvent>> group_waves(std::span<const InterventionEvent> events);

}  // namespace riskphase
