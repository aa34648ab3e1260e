#ifndef BELL_LAB_H
#define BELL_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The statistic is undefined for this input (for example an empty
   * setting combination).
   */
  BL_STATUS_UNDEFINED = 3,
  BL_STATUS_PANIC = 4,
} BlStatus;

/**
 * Instruction-set generator for the coin-toss challenge.
 */
typedef enum BlGenerator {
  BL_GENERATOR_UNIFORM = 0,
  BL_GENERATOR_CONSTANT = 1,
  BL_GENERATOR_BOUNDARY = 2,
} BlGenerator;

typedef enum BlHomogeneityMethod {
  BL_HOMOGENEITY_METHOD_CHI_SQUARE_SPLITS = 0,
  BL_HOMOGENEITY_METHOD_TWO_SAMPLE_KS = 1,
  BL_HOMOGENEITY_METHOD_RUNS_TEST = 2,
} BlHomogeneityMethod;

typedef struct BlCampaign BlCampaign;

typedef struct BlRng BlRng;

typedef struct BlSpreadsheet BlSpreadsheet;

/**
 * One paired trial; outcomes are -1, 0 (no count) or +1.
 */
typedef struct BlTrial {
  uint8_t setting_a;
  uint8_t setting_b;
  int8_t a;
  int8_t b;
} BlTrial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *bl_last_error(void);

/**
 * Library version as a static string.
 */
const char *bl_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bl_string_free(char *s);

/**
 * Creates a generator for `(seed, stream)`. Never returns null.
 */
struct BlRng *bl_rng_new(uint64_t seed, uint64_t stream);

/**
 * # Safety
 * `rng` must come from [`bl_rng_new`] and not have been freed.
 */
void bl_rng_free(struct BlRng *rng);

/**
 * `−cos(θa − θb)`.
 */
double bl_singlet_correlation(double theta_a, double theta_b);

/**
 * Draws one singlet pair into `out_a`, `out_b` (±1).
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_singlet_sample(struct BlRng *rng,
                                double theta_a,
                                double theta_b,
                                int8_t *out_a,
                                int8_t *out_b);

/**
 * Generates an `n_rows × 4` instruction-set spreadsheet.
 *
 * # Safety
 * `rng` and `out` must be valid.
 */
enum BlStatus bl_spreadsheet_generate(size_t n_rows,
                                      enum BlGenerator gen,
                                      struct BlRng *rng,
                                      struct BlSpreadsheet **out);

/**
 * # Safety
 * `sheet` must be a live handle or null.
 */
size_t bl_spreadsheet_len(const struct BlSpreadsheet *sheet);

/**
 * # Safety
 * `sheet` must come from [`bl_spreadsheet_generate`] and not have been freed.
 */
void bl_spreadsheet_free(struct BlSpreadsheet *sheet);

/**
 * One coin-toss subsample of `sheet`; writes the CHSH value.
 * Returns `BL_STATUS_UNDEFINED` when a setting combination drew no rows.
 *
 * # Safety
 * All pointers must be valid.
 */
enum BlStatus bl_gill_subsample(const struct BlSpreadsheet *sheet,
                                struct BlRng *rng,
                                double *out_s);

/**
 * Runs the coin-toss challenge campaign.
 *
 * # Safety
 * `out` must be valid.
 */
enum BlStatus bl_gill_campaign(enum BlGenerator gen,
                               size_t sheet_size,
                               size_t runs,
                               uint64_t seed,
                               struct BlCampaign **out);

/**
 * Runs the tennis-ball campaign. `variant` is `strict`,
 * `missing_pairs[:p]`, `partial_anticorr[:q]` or `quantum`.
 *
 * # Safety
 * `variant` must be a NUL-terminated string and `out` valid.
 */
enum BlStatus bl_vongher_campaign(const char *variant,
                                  size_t n_pairs,
                                  size_t runs,
                                  uint64_t seed,
                                  struct BlCampaign **out);

/**
 * Fraction of runs violating CHSH.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BlStatus bl_campaign_chsh_rate(const struct BlCampaign *c, double *out);

/**
 * Fraction of runs violating the counter inequality;
 * `BL_STATUS_UNDEFINED` for campaigns that do not test it.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BlStatus bl_campaign_bell_rate(const struct BlCampaign *c, double *out);

/**
 * # Safety
 * `c` must be a live handle or null.
 */
uint64_t bl_campaign_runs(const struct BlCampaign *c);

/**
 * The full report as JSON. Free with [`bl_string_free`]; null on failure.
 *
 * # Safety
 * `c` must be a live handle.
 */
char *bl_campaign_to_json(const struct BlCampaign *c);

/**
 * # Safety
 * `c` must come from a campaign function and not have been freed.
 */
void bl_campaign_free(struct BlCampaign *c);

/**
 * Plays `rounds` of the Bell game with uniform settings and writes
 * `4 × points / rounds`. `strategy` is `random`, `quantum`, `contextual`
 * or `fixed:i,j`.
 *
 * # Safety
 * `strategy` must be a NUL-terminated string and `out_avg_score` valid.
 */
enum BlStatus bl_bellgame_play(const char *strategy,
                               uint64_t rounds,
                               uint64_t seed,
                               double *out_avg_score);

/**
 * Mean and standard error of `n` bin values.
 *
 * # Safety
 * `values` must point to `n` doubles; out-pointers must be valid.
 */
enum BlStatus bl_sem(const double *values, size_t n, double *out_mean, double *out_sem);

/**
 * Chebyshev confidence for rejecting `null_bound`. `out_certain` is set
 * when `sem = 0` and the mean is off the bound.
 *
 * # Safety
 * Out-pointers must be valid.
 */
enum BlStatus bl_chebyshev_confidence(double mean,
                                      double sem,
                                      double null_bound,
                                      double *out_level,
                                      bool *out_certain);

/**
 * Homogeneity test on `n` values in time order. `parts` is used only by
 * the chi-square split test.
 *
 * # Safety
 * `values` must point to `n` doubles; out-pointers must be valid.
 */
enum BlStatus bl_homogeneity(const double *values,
                             size_t n,
                             enum BlHomogeneityMethod method,
                             size_t parts,
                             double *out_statistic,
                             double *out_p_value);

/**
 * Eberhard `J` over `n` trials with the given label-to-subscript mapping.
 *
 * # Safety
 * `trials` must point to `n` records; `out_j` must be valid.
 */
enum BlStatus bl_eberhard_j(const struct BlTrial *trials,
                            size_t n,
                            uint8_t a1,
                            uint8_t a2,
                            uint8_t b1,
                            uint8_t b2,
                            int64_t *out_j);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELL_LAB_H */
