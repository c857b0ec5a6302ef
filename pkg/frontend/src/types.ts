// Wire types for the annotation service API.

export interface QuestionPayload {
  id: string;
  text: string;
  template: string;
  keywords: string[];
}

export interface PairResponse {
  pair_token: string;
  left: QuestionPayload;
  right: QuestionPayload;
  my_judged_count: number;
  board_version: number;
}

export type Winner = "LEFT" | "RIGHT";

export interface JudgmentResponse {
  accepted: boolean;
  new_ratings: Record<string, number>;
  board_version: number;
}

export interface LeaderboardEntry {
  question_id: string;
  rating: number;
  comparisons: number;
  label: number;
}

export interface LeaderboardResponse {
  board_version: number;
  entries: LeaderboardEntry[];
}
