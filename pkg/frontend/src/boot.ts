/** Browser entry point: wire the app against the service that served this page. */
import { initApp } from "./main.js";

initApp(document);
