// Tiny static server for local development: `npm run serve` then open
// http://127.0.0.1:8080 (the API server runs separately on its own port).
import { createServer } from "node:http";
import { readFile } from "node:fs/promises";
import { extname, join, normalize } from "node:path";
import { fileURLToPath } from "node:url";

const rootDir = fileURLToPath(new URL("..", import.meta.url));
const port = Number(process.env.PORT ?? 8080);

const MIME = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".map": "application/json",
  ".css": "text/css",
  ".json": "application/json",
};

createServer(async (req, res) => {
  const path = req.url === "/" ? "/index.html" : (req.url ?? "/index.html");
  const file = normalize(join(rootDir, path.split("?")[0]));
  if (!file.startsWith(rootDir)) {
    res.writeHead(403).end();
    return;
  }
  try {
    const body = await readFile(file);
    res.writeHead(200, { "content-type": MIME[extname(file)] ?? "application/octet-stream" });
    res.end(body);
  } catch {
    res.writeHead(404).end("not found");
  }
}).listen(port, "127.0.0.1", () => {
  console.log(`ui at http://127.0.0.1:${port} (build first: npm run build)`);
});
