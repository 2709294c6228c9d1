#ifndef GRICP_GRICP_H
#define GRICP_GRICP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GRICP_BUILDING_LIBRARY)
#    define GRICP_API __declspec(dllexport)
#  else
#    define GRICP_API __declspec(dllimport)
#  endif
#else
#  define GRICP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gricp_status {
  GRICP_OK = 0,
  GRICP_ERR_INVALID_ARGUMENT = 1,
  GRICP_ERR_PARSE = 2,
  GRICP_ERR_IO = 3,
  GRICP_ERR_EMPTY_REFERENCE = 4,
  GRICP_ERR_NO_CORRESPONDENCES = 5,
  GRICP_ERR_DEGENERATE_GEOMETRY = 6,
  GRICP_ERR_INSUFFICIENT_POINTS = 7,
  GRICP_ERR_EMPTY_TRAJECTORY = 8,
  GRICP_ERR_NO_ASSOCIATION = 9,
  GRICP_ERR_OUT_OF_SCENE = 10,
  GRICP_ERR_INTERNAL = 99
} gricp_status;

/* Message of the last failed call on this thread ("" if none). */
GRICP_API const char* gricp_last_error(void);
GRICP_API const char* gricp_status_string(gricp_status status);

/* Rotation as a unit quaternion (w, x, y, z) plus translation in metres. */
typedef struct gricp_pose {
  double qw, qx, qy, qz;
  double tx, ty, tz;
} gricp_pose;

GRICP_API gricp_pose gricp_pose_identity(void);
/* Yaw rotation by gamma about z plus translation (the 4-DOF increment). */
GRICP_API gricp_status gricp_pose_from_tau(double gamma, double tx, double ty, double tz,
                                           gricp_pose* out);
/* Z-Y-X Euler angles in radians. */
GRICP_API gricp_status gricp_pose_euler(const gricp_pose* pose, double* roll, double* pitch,
                                        double* yaw);

/* ---- point clouds ---- */

typedef struct gricp_cloud gricp_cloud;

/* xyz holds n packed triples; normals is NULL or n packed unit triples. */
GRICP_API gricp_status gricp_cloud_create(const double* xyz, size_t n, const double* normals,
                                          gricp_cloud** out);
GRICP_API gricp_status gricp_cloud_read(const char* path, gricp_cloud** out);
GRICP_API gricp_status gricp_cloud_write(const gricp_cloud* cloud, const char* path);
GRICP_API void gricp_cloud_destroy(gricp_cloud* cloud);
GRICP_API size_t gricp_cloud_size(const gricp_cloud* cloud);
GRICP_API int gricp_cloud_has_normals(const gricp_cloud* cloud);
GRICP_API gricp_status gricp_cloud_point(const gricp_cloud* cloud, size_t i, double xyz[3]);
GRICP_API gricp_status gricp_cloud_normal(const gricp_cloud* cloud, size_t i, double n[3]);
/* PCA normals over k neighbours, flipped toward orient (NULL = origin). */
GRICP_API gricp_status gricp_cloud_estimate_normals(const gricp_cloud* cloud, size_t k,
                                                    const double orient[3], gricp_cloud** out);

/* ---- trajectories ---- */

typedef struct gricp_trajectory gricp_trajectory;

GRICP_API gricp_status gricp_trajectory_create(gricp_trajectory** out);
GRICP_API gricp_status gricp_trajectory_read(const char* path, gricp_trajectory** out);
GRICP_API gricp_status gricp_trajectory_write(const gricp_trajectory* traj, const char* path);
GRICP_API void gricp_trajectory_destroy(gricp_trajectory* traj);
/* Stamps must be strictly increasing. */
GRICP_API gricp_status gricp_trajectory_append(gricp_trajectory* traj, double stamp,
                                               const gricp_pose* pose);
GRICP_API size_t gricp_trajectory_size(const gricp_trajectory* traj);
GRICP_API gricp_status gricp_trajectory_get(const gricp_trajectory* traj, size_t i,
                                            double* stamp, gricp_pose* pose);

/* ---- registration ---- */

typedef enum gricp_mode { GRICP_MODE_4DOF = 0, GRICP_MODE_6DOF = 1 } gricp_mode;

typedef struct gricp_icp_config {
  int mode;
  int max_iterations;
  double trans_epsilon;
  double rot_epsilon;
  double max_distance;
  double trim_ratio;
} gricp_icp_config;

typedef struct gricp_icp_result {
  gricp_pose pose;
  int iterations;
  int converged;
  double initial_residual;
  double final_residual;
  size_t pair_count;
} gricp_icp_result;

GRICP_API void gricp_icp_config_defaults(gricp_icp_config* config);
/* Registers scan (sensor frame) onto map (world frame). Map normals are
 * estimated when the map has none. */
GRICP_API gricp_status gricp_register(const gricp_cloud* scan, const gricp_cloud* map,
                                      const gricp_pose* prior, const gricp_icp_config* config,
                                      gricp_icp_result* out);

/* ---- mapper ---- */

typedef struct gricp_mapper_config {
  gricp_icp_config icp;
  double insertion_min_spacing;
  double scan_keep_ratio;
  size_t normal_k;
  int localize_only;
  uint64_t seed;
} gricp_mapper_config;

typedef struct gricp_scan_outcome {
  gricp_icp_result icp;
  /* 0 for the bootstrap scan and for failed scans. */
  int registered;
  int failed;
  /* Status of the failed registration, GRICP_OK otherwise. */
  gricp_status failure;
  size_t inserted;
} gricp_scan_outcome;

typedef struct gricp_mapper gricp_mapper;

GRICP_API void gricp_mapper_config_defaults(gricp_mapper_config* config);
/* Overrides fields of *config with the icp.*, match.* and mapper.* keys of a
 * key = value file. */
GRICP_API gricp_status gricp_mapper_config_load(const char* path, gricp_mapper_config* config);
/* reference may be NULL; localize_only requires one. */
GRICP_API gricp_status gricp_mapper_create(const gricp_mapper_config* config,
                                           const gricp_cloud* reference, gricp_mapper** out);
GRICP_API void gricp_mapper_destroy(gricp_mapper* mapper);
/* outcome may be NULL. Registration failures are not errors: they are
 * reported through outcome->failed and the pose falls back to the prior. */
GRICP_API gricp_status gricp_mapper_process(gricp_mapper* mapper, const gricp_cloud* scan,
                                            const gricp_pose* prior, double stamp,
                                            gricp_scan_outcome* outcome);
GRICP_API gricp_status gricp_mapper_map(const gricp_mapper* mapper, gricp_cloud** out);
GRICP_API gricp_status gricp_mapper_trajectory(const gricp_mapper* mapper,
                                               gricp_trajectory** out);

/* ---- evaluation ---- */

typedef struct gricp_ate_report gricp_ate_report;

GRICP_API gricp_status gricp_eval_ate(const gricp_trajectory* est, const gricp_trajectory* ref,
                                      double max_dt, int align, gricp_ate_report** out);
GRICP_API void gricp_ate_destroy(gricp_ate_report* report);
GRICP_API size_t gricp_ate_size(const gricp_ate_report* report);
GRICP_API gricp_status gricp_ate_pose(const gricp_ate_report* report, size_t i, double* stamp,
                                      double e_xyz[3], double* e_norm, double* distance);
/* (q1, median, q3) of the distance-normalized error in percent. */
GRICP_API gricp_status gricp_ate_quartiles(const gricp_ate_report* report, double out[3]);
GRICP_API double gricp_ate_rmse(const gricp_ate_report* report);
GRICP_API double gricp_ate_final_abs_z(const gricp_ate_report* report);
/* "distance e_z e_norm" rows. */
GRICP_API gricp_status gricp_ate_write_series(const gricp_ate_report* report, const char* path);
GRICP_API gricp_status gricp_ate_write_summary(const gricp_ate_report* report, const char* path);

GRICP_API gricp_status gricp_pitch_correction(double loop_length, double elevation_error,
                                              double* out);

/* ---- synthetic scenarios ---- */

typedef struct gricp_scenario gricp_scenario;
typedef struct gricp_bench_report gricp_bench_report;

GRICP_API gricp_status gricp_scenario_create(gricp_scenario** out);
GRICP_API gricp_status gricp_scenario_load(const char* path, gricp_scenario** out);
GRICP_API void gricp_scenario_destroy(gricp_scenario* scenario);
/* Sets one key as if it appeared in the scenario file; the scenario is
 * revalidated and left unchanged on error. */
GRICP_API gricp_status gricp_scenario_set(gricp_scenario* scenario, const char* key,
                                          const char* value);
/* Writes scans/NNNNNN.ply, priors.txt and truth.txt under out_dir; with
 * write_scene also scene_map.ply, a dense surface sample with exact normals. */
GRICP_API gricp_status gricp_synth_generate(const gricp_scenario* scenario, uint64_t seed,
                                            int write_scene, const char* out_dir);

/* Runs both modes on every seed and writes the report tree under out_dir
 * (NULL skips writing). */
GRICP_API gricp_status gricp_bench_drift(const gricp_scenario* scenario, const uint64_t* seeds,
                                         size_t n_seeds, const char* out_dir,
                                         gricp_bench_report** out);
GRICP_API void gricp_bench_destroy(gricp_bench_report* report);
GRICP_API size_t gricp_bench_size(const gricp_bench_report* report);
GRICP_API gricp_status gricp_bench_seed(const gricp_bench_report* report, size_t i,
                                        uint64_t* seed, double* final_abs_ez_4dof,
                                        double* final_abs_ez_6dof);
GRICP_API double gricp_bench_median_4dof(const gricp_bench_report* report);
GRICP_API double gricp_bench_median_6dof(const gricp_bench_report* report);
GRICP_API size_t gricp_bench_wins_4dof(const gricp_bench_report* report);

#ifdef __cplusplus
}
#endif

#endif
