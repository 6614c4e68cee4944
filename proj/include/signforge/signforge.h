/* Copyright 2026 The SignForge Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the SignForge toolkit. Every call returns an sf_status;
 * on failure sf_last_error() describes the problem for the calling thread.
 * Strings returned through char** parameters are owned by the caller and
 * released with sf_string_free().
 */
#ifndef SIGNFORGE_SIGNFORGE_H_
#define SIGNFORGE_SIGNFORGE_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_PARAMETER = 1,
  SF_ERR_DIMENSION = 2,
  SF_ERR_CONTRACT = 3,
  SF_ERR_VOCABULARY = 4,
  SF_ERR_DEGENERATE_MASK = 5,
  SF_ERR_LOAD = 6,
  SF_ERR_IO = 7,
  SF_ERR_CONFIG = 8,
  SF_ERR_INTERNAL = 9
} sf_status;

/* Opaque trained model of any task (t2g, g2p, t2p or p2t). */
typedef struct sf_model sf_model;

SF_API const char* sf_version(void);
/* Short lowercase category name, e.g. "load" or "config". */
SF_API const char* sf_status_name(sf_status status);
/* Message of the last failed call on this thread; "" if none. */
SF_API const char* sf_last_error(void);
SF_API void sf_string_free(char* s);

/* Writes a synthetic train/dev/test corpus configured by the toy.* keys of
 * config_text (which may be empty) into out_dir. */
SF_API sf_status sf_synth_data(const char* config_text, const char* out_dir);

/* Trains the model described by config_text, writing out_dir/model.ckpt and
 * out_dir/train.log. When echo is nonzero the log is also printed to stdout. */
SF_API sf_status sf_train(const char* config_text, const char* out_dir, int echo);

SF_API sf_status sf_model_load(const char* path, sf_model** out);
SF_API void sf_model_free(sf_model* model);
/* One-line key=value summary of the checkpoint. */
SF_API sf_status sf_model_describe(const sf_model* model, char** out);

/* Greedy text-to-gloss translation of newline-separated sentences. */
SF_API sf_status sf_translate(const sf_model* t2g, const char* text, char** out);

/* Produces poses for every sample of data_dir/<split>. With a t2p model and
 * g2p == NULL this is the T2P configuration; with a t2g model and a g2p
 * model it is T2G2P. mode is "free" or "counter-driven"; max_frames == 0
 * uses the model default. Writes out_dir/<split>.ids, <split>.text and
 * out_dir/pose/<id>.pose3. */
SF_API sf_status sf_produce(const sf_model* primary, const sf_model* g2p, const char* data_dir, const char* split,
                            const char* mode, size_t max_frames, const char* out_dir);

/* Back-translates productions with a p2t model and scores them against the
 * reference split. *report receives the "bleu1=... dtw_mean=..." line. */
SF_API sf_status sf_evaluate(const sf_model* p2t, const char* production_dir, const char* data_dir,
                             const char* split, char** report);

/* DTW between two pose files. */
SF_API sf_status sf_dtw(const char* pose_a, const char* pose_b, double* total_cost, double* normalized_cost,
                        size_t* path_length);

#ifdef __cplusplus
}
#endif

#endif /* SIGNFORGE_SIGNFORGE_H_ */
