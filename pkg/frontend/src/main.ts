import { ApiClient } from "./api";
import { AnnotationApp } from "./app";

function annotatorId(): string {
  const fromUrl = new URLSearchParams(window.location.search).get("annotator");
  if (fromUrl && fromUrl.trim()) return fromUrl.trim();
  const typed = window.prompt("Annotator id:");
  if (typed && typed.trim()) {
    const url = new URL(window.location.href);
    url.searchParams.set("annotator", typed.trim());
    window.history.replaceState(null, "", url);
    return typed.trim();
  }
  return "anonymous";
}

const root = document.getElementById("app");
if (root) {
  const app = new AnnotationApp(root, new ApiClient(), {
    annotator: annotatorId(),
  });
  void app.start();
}
