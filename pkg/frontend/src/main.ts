import { App } from "./app";
import "./style.css";

new App(document.querySelector<HTMLDivElement>("#app")!).init();
