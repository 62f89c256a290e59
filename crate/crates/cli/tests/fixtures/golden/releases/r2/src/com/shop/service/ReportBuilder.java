package com.shop.service;

import com.shop.model.CustomerRecord;
import com.shop.model.Order;

public class ReportBuilder {
    private PricingService pricing;
    private int rendered;

    public String render(Order first, Order second, CustomerRecord record, int verbosity) {
        String body = "";
        long cents = pricing.applyDiscount(first, record);
        if (verbosity > 0) {
            if (first.isEmpty()) {
                body = body + "first: empty; ";
            } else {
                body = body + "first: " + cents + "; ";
                if (verbosity > 1) {
                    body = body + "base: " + first.getTotalCents() + "; ";
                }
            }
            if (second != null && !second.isEmpty()) {
                body = body + "second: " + second.getTotalCents() + "; ";
            }
        }
        int line = 0;
        while (line < verbosity) {
            body = body + "-";
            line = line + 1;
        }
        rendered = rendered + 1;
        return body;
    }

    public int renderedCount() {
        return rendered;
    }
}
