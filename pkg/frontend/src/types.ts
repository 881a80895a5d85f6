/** Wire types of the annotation-service JSON API. */

export type Label = "positive" | "negative";

export interface InstanceQuery {
  sentence_id: string;
  text: string;
  entropy: number | null; // null before the first model exists
  rank: number;
}

export interface FeatureQuery {
  feature: string;
  class: Label;
  score: number;
  rank: number;
}

export interface QueriesResponse {
  session_id: string;
  round: number;
  model_trained: boolean;
  instances: InstanceQuery[];
  features: FeatureQuery[];
}

export interface InstanceSubmission {
  id: string;
  label: Label;
  rule_ids?: string[];
}

export interface FeatureSubmission {
  feature: string;
  class: Label;
}

export interface LabelsRequest {
  token: string;
  rater_id: string;
  instances: InstanceSubmission[];
  features: FeatureSubmission[];
}

export interface RoundLog {
  round: number;
  new_instance_labels: number;
  new_feature_labels: number;
  labeled_size: number;
  unlabeled_size: number;
  metrics: Record<string, unknown>;
}

export interface Metrics {
  session_id: string;
  round: number;
  model_trained: boolean;
  labeled: number;
  unlabeled: number;
  labeled_per_class: Record<Label, number>;
  labeled_features: string[];
  guideline_version: string;
}

export interface GuidelineRule {
  id: string;
  text: string;
  children?: GuidelineRule[];
}

export interface Guidelines {
  name: string;
  version: string;
  task: string;
  rules: GuidelineRule[];
}

export interface ApiError {
  code: string;
  message: string;
}
