import type {
  JudgmentResponse,
  LeaderboardResponse,
  PairResponse,
  QuestionPayload,
  Winner,
} from "./types";

/** Error carrying the HTTP status so callers can branch on 409/410. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const message =
      typeof body === "object" && body !== null && "error" in body
        ? String((body as { error: unknown }).error)
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

/**
 * Thin typed client for the annotation service. The UI never mutates
 * server state through anything but submitJudgment.
 */
export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  nextPair(annotator: string): Promise<PairResponse> {
    const query = encodeURIComponent(annotator);
    return fetch(`${this.baseUrl}/api/pair/next?annotator=${query}`).then(
      (r) => asJson<PairResponse>(r),
    );
  }

  submitJudgment(pairToken: string, winner: Winner): Promise<JudgmentResponse> {
    return fetch(`${this.baseUrl}/api/judgment`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pair_token: pairToken, winner }),
    }).then((r) => asJson<JudgmentResponse>(r));
  }

  leaderboard(): Promise<LeaderboardResponse> {
    return fetch(`${this.baseUrl}/api/leaderboard`).then((r) =>
      asJson<LeaderboardResponse>(r),
    );
  }

  question(id: string): Promise<QuestionPayload> {
    return fetch(`${this.baseUrl}/api/question/${encodeURIComponent(id)}`).then(
      (r) => asJson<QuestionPayload>(r),
    );
  }
}
