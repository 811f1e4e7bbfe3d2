package com.jee;

import javax.servlet.http.HttpServlet;

public class MySecondServlet extends HttpServlet {
}
