/* C interface to the spectral-embedding engine: opaque handles, integer
 * status codes, thread-local error text. Every function that can fail
 * returns a status; out-parameters are written only on SEPSPEC_OK. Arrays
 * are dense row-major doubles; callers own every buffer they pass. */
#ifndef SEPSPEC_H
#define SEPSPEC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SEPSPEC_OK 0
#define SEPSPEC_ERR_ARG 1     /* misuse: bad argument, unknown key, missing state */
#define SEPSPEC_ERR_DATA 2    /* unusable input: files, CSV, shape mismatches */
#define SEPSPEC_ERR_NUMERIC 3 /* numerical breakdown: non-finite loss, no convergence */

/* Library version as "major.minor.patch". */
const char* sepspec_version(void);

/* Message for the calling thread's most recent failure; empty if none. The
 * pointer stays valid until the same thread's next failing call. */
const char* sepspec_last_error(void);

typedef struct sepspec_dataset sepspec_dataset;
typedef struct sepspec_config sepspec_config;
typedef struct sepspec_model sepspec_model;
typedef struct sepspec_numap sepspec_numap;

/* ---- datasets ---------------------------------------------------------- */

/* kind: moon | two_circles | tangent_spheres | cylinders | line |
 * two_clusters_timeseries. step is the time index for the last kind and must
 * be 0 otherwise. Equal arguments produce byte-identical data. */
int sepspec_dataset_generate(const char* kind, size_t n, size_t ambient_dim, double noise,
                             uint64_t seed, int step, sepspec_dataset** out);

/* data: n*dim row-major; labels: one per row, or NULL for unlabeled. */
int sepspec_dataset_from_arrays(const double* data, size_t n, size_t dim, const int32_t* labels,
                                sepspec_dataset** out);

int sepspec_dataset_load_csv(const char* path, sepspec_dataset** out);
int sepspec_dataset_save_csv(const sepspec_dataset* d, const char* path);

/* Seeded permutation split; train receives floor(train_frac * n) rows. */
int sepspec_dataset_split(const sepspec_dataset* d, double train_frac, uint64_t seed,
                          sepspec_dataset** train_out, sepspec_dataset** test_out);

size_t sepspec_dataset_n(const sepspec_dataset* d);
size_t sepspec_dataset_dim(const sepspec_dataset* d);
int sepspec_dataset_has_labels(const sepspec_dataset* d);
/* out must hold n*dim doubles / n int32s. */
int sepspec_dataset_copy_data(const sepspec_dataset* d, double* out);
int sepspec_dataset_copy_labels(const sepspec_dataset* d, int32_t* out);
void sepspec_dataset_destroy(sepspec_dataset* d);

/* ---- configuration ----------------------------------------------------- */

/* A flat key=value bag shared by training, NUMAP, and evaluation. Keys and
 * values are validated on set: an unknown key or an unparsable value fails
 * with SEPSPEC_ERR_ARG and leaves the bag unchanged.
 *
 * Training keys (consumed by sepspec_train; defaults in parentheses):
 *   k (2), batch_size (2048), knn (20), hidden ("256,256,512"), lr (1e-2),
 *   min_lr (1e-7), lr_divisor (10), val_frac (0.1), max_epochs (100000),
 *   t_batches (0 = floor(n/m)), seed (1),
 *   loss_variant (unnormalized | symmetric | random_walk),
 *   separation_variant (same choices, default random_walk)
 * NUMAP keys (consumed by sepspec_numap_train, which also reads the training
 * keys above with an "se." prefix, e.g. se.k, se.lr):
 *   out_dim (2), n_neighbors (10), kernel_a (1), kernel_b (1),
 *   neg_samples (5), g_hidden ("200,200,200"), numap_lr (1e-3),
 *   numap_epochs (150), residual (true), use_se (true),
 *   resample_negatives (true), seed (1)
 * Evaluation keys (consumed by sepspec_grassmann_score / sepspec_evaluate):
 *   gs_t_vecs (2), gs_neighbors (50), oracle_knn (20), knn_k (5),
 *   oracle_variant (unnormalized)
 */
int sepspec_config_create(sepspec_config** out);
int sepspec_config_set(sepspec_config* cfg, const char* key, const char* value);
/* Retrieves the effective value (set or default) as text into buf. */
int sepspec_config_get(const sepspec_config* cfg, const char* key, char* buf, size_t buf_len);
void sepspec_config_destroy(sepspec_config* cfg);

/* ---- spectral model ----------------------------------------------------- */

/* Trains the embedding network on train's samples. cfg may be NULL for all
 * defaults. The model is not yet separated. */
int sepspec_train(const sepspec_dataset* train, const sepspec_config* cfg, sepspec_model** out);

/* Recovers the eigenvector rotation and eigenvalues on the training set. */
int sepspec_separate(sepspec_model* model, const sepspec_dataset* train);

/* Separated embedding; out must hold n*k doubles. Requires sepspec_separate. */
int sepspec_embed(const sepspec_model* model, const double* x, size_t n, size_t dim, double* out);

/* Raw network outputs; out must hold n*(k+1) doubles. */
int sepspec_forward_raw(const sepspec_model* model, const double* x, size_t n, size_t dim,
                        double* out);

size_t sepspec_model_k(const sepspec_model* model);
int sepspec_model_separated(const sepspec_model* model);
/* out must hold k doubles; requires a separated model. */
int sepspec_model_eigenvalues(const sepspec_model* model, double* out);
int sepspec_model_epochs(const sepspec_model* model, size_t* out);

/* JSON persistence; weights round-trip exactly. */
int sepspec_model_save(const sepspec_model* model, const char* path);
int sepspec_model_load(const char* path, sepspec_model** out);
void sepspec_model_destroy(sepspec_model* model);

/* ---- dense reference paths and metrics ---------------------------------- */

/* Dense eigendecomposition of the dataset's kNN-graph Laplacian.
 * variant: unnormalized | symmetric | random_walk. Writes k (+1 when
 * include_trivial) eigenvector columns to vectors_out (n rows, row-major)
 * and as many eigenvalues to values_out; either pointer may be NULL. */
int sepspec_oracle_embed(const sepspec_dataset* d, const char* variant, size_t k,
                         int include_trivial, size_t knn_k, double* vectors_out,
                         double* values_out);

/* Per-position sin^2 between the columns of two n*k arrays. */
int sepspec_sin2_per_vector(const double* a, const double* b, size_t n, size_t k, double* out);

/* Sum of squared principal-angle sines between two column spans. */
int sepspec_grassmann_distance(const double* a, const double* b, size_t n, size_t k, double* out);

/* Grassmann score of embedding y against inputs x (lower is better). cfg may
 * be NULL; it supplies gs_t_vecs and gs_neighbors. */
int sepspec_grassmann_score(const double* x, size_t n, size_t d, const double* y, size_t y_dim,
                            const sepspec_config* cfg, double* out);

/* Majority-vote kNN accuracy of eval points against a labeled reference. */
int sepspec_knn_accuracy(const double* train_y, const int32_t* train_labels, size_t train_n,
                         const double* eval_y, const int32_t* eval_labels, size_t eval_n,
                         size_t dim, size_t knn_k, double* out);

int sepspec_pearson(const double* a, const double* b, size_t len, double* out);

/* Full model evaluation against the dense reference; returns the eval report
 * as a JSON string in buf (truncation fails with SEPSPEC_ERR_ARG). test may
 * be NULL to score on the training set. cfg supplies the evaluation keys. */
int sepspec_evaluate(const sepspec_model* model, const sepspec_dataset* train,
                     const sepspec_dataset* test, const sepspec_config* cfg, char* buf,
                     size_t buf_len);

/* ---- applications ------------------------------------------------------- */

/* Dense-path Fiedler pair of the dataset's kNN graph. vector_out may be NULL,
 * otherwise it must hold n doubles. */
int sepspec_fiedler(const sepspec_dataset* d, size_t knn_k, const char* variant, double* value_out,
                    double* vector_out);

/* Model-path Fiedler estimate: first separated column plus its eigenvalue. */
int sepspec_model_fiedler(const sepspec_model* model, const double* x, size_t n, size_t dim,
                          double* value_out, double* vector_out);

/* Diffusion-map coordinates at time t. Dense path on the dataset's graph
 * (trivial pair skipped); out must hold n*k doubles. */
int sepspec_diffusion(const sepspec_dataset* d, size_t knn_k, size_t k, double t, double* out);

/* Model path: separated columns scaled by the recovered decay factors. */
int sepspec_model_diffusion(const sepspec_model* model, const double* x, size_t n, size_t dim,
                            double t, double* out);

/* ---- NUMAP -------------------------------------------------------------- */

int sepspec_numap_train(const sepspec_dataset* train, const sepspec_config* cfg,
                        sepspec_numap** out);
/* out must hold n*out_dim doubles. */
int sepspec_numap_embed(const sepspec_numap* model, const double* x, size_t n, size_t dim,
                        double* out);
size_t sepspec_numap_out_dim(const sepspec_numap* model);
int sepspec_numap_save(const sepspec_numap* model, const char* path);
int sepspec_numap_load(const char* path, sepspec_numap** out);
void sepspec_numap_destroy(sepspec_numap* model);

#ifdef __cplusplus
}
#endif

#endif /* SEPSPEC_H */
